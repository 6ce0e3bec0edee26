//! Repository runs: per-commit analysis, aggregation and persisted output.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use git2::{Oid, Repository};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::history::{commit_ids, method_changes, open};
use super::pair::{diff_pair, DiffedPair, MethodLines};
use super::{ChangeClass, MiningError, RepoRunConfig};
use crate::catalog::{MicroChangeInstance, MicroChangeType};
use crate::metrics::{mean_coverage, Coverage, CoverageCounts, FrequencyReport, REPORT_SCHEMA_VERSION};
use crate::refactorings::{infer_renames, load_refactoring_report, name_updates, RecordIndex, RefactoringRecord};
use crate::treediff::Pruning;

pub const REPORT_FILE: &str = "report.json";
pub const INSTANCES_FILE: &str = "instances.jsonl";
pub const METHODS_FILE: &str = "methods.jsonl";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodStatus {
    Analyzed,
    OnlyInsertions,
    OnlyDeletions,
    ParseError,
}

/// One modified method, as written to `methods.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub commit: String,
    pub file: String,
    pub method: String,
    pub status: MethodStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub actions: usize,
    pub rename_covered: usize,
    pub instances: usize,
    #[serde(flatten)]
    pub lines: MethodLines,
    pub counts: CoverageCounts,
    pub coverage: Coverage,
}

/// One detected micro-change, as written to `instances.jsonl`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub commit: String,
    pub file: String,
    pub method: String,
    #[serde(flatten)]
    pub instance: MicroChangeInstance,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommitResult {
    pub commit: String,
    pub methods: Vec<MethodRecord>,
    pub instances: Vec<InstanceRecord>,
    pub methods_added: usize,
    pub methods_deleted: usize,
    pub files_with_syntax_errors: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Non-merge commits visited.
    pub commits: usize,
    pub merge_commits_skipped: usize,
    /// Commits modifying at least one existing method.
    pub commits_with_method_changes: usize,
    /// Commits whose modified methods all had insertion-only or
    /// deletion-only scripts.
    pub pure_commits: usize,
    /// Commits with at least one analyzed method pair.
    pub processed_commits: usize,
    /// Commits with conditional-related changed lines.
    pub conditional_related_commits: usize,
    pub methods_added: usize,
    pub methods_deleted: usize,
    /// Modified methods; equals analyzed + pruned + parse errors.
    pub processed_methods: usize,
    pub analyzed_methods: usize,
    pub pruned_only_insertions: usize,
    pub pruned_only_deletions: usize,
    pub parse_errors: usize,
    /// Analyzed methods with conditional-related changed lines.
    pub conditional_related_changes: usize,
    pub files_with_syntax_errors: usize,
    pub rename_covered_actions: usize,
    pub instances: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    /// Commits with |CRC| > 0, the ones averaged.
    pub commits_with_crc: usize,
    /// Unweighted mean of the commit-level ratios.
    pub commit_mean: Coverage,
    /// Ratios of the summed counts over all commits.
    pub pooled: Coverage,
    pub counts: CoverageCounts,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenameSource {
    None,
    Report,
    Inferred,
    ReportAndInferred,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepoReport {
    pub schema_version: u32,
    pub repository: String,
    pub revision: String,
    pub renames: RenameSource,
    pub stats: RunStats,
    pub coverage: CoverageSummary,
    pub frequency: FrequencyReport,
}

/// Turns per-commit results, in order, into the coverage summary and the
/// frequency table.
#[derive(Default)]
struct Aggregator {
    commit_coverages: Vec<Coverage>,
    counts: CoverageCounts,
    types: std::collections::BTreeMap<MicroChangeType, usize>,
}

impl Aggregator {
    fn push(&mut self, methods: &[MethodRecord], instances: &[InstanceRecord]) -> CoverageCounts {
        let mut commit = CoverageCounts::default();
        for m in methods {
            commit.add(&m.counts);
        }
        let ratios = commit.ratios();
        assert!(ratios.identities_hold(), "coverage bounds violated: {ratios:?}");
        self.commit_coverages.push(ratios);
        self.counts.add(&commit);
        for i in instances {
            *self.types.entry(i.instance.kind).or_insert(0) += 1;
        }
        commit
    }

    fn finish(self) -> (CoverageSummary, FrequencyReport) {
        let (commit_mean, commits_with_crc) = mean_coverage(&self.commit_coverages);
        let pooled = self.counts.ratios();
        assert!(commit_mean.identities_hold() && pooled.identities_hold());
        let summary = CoverageSummary { commits_with_crc, commit_mean, pooled, counts: self.counts };
        (summary, FrequencyReport::from_counts(&self.types))
    }
}

/// Recomputes coverage and frequencies from persisted records, which must be
/// grouped by commit in mining order.
pub fn summarize(methods: &[MethodRecord], instances: &[InstanceRecord]) -> (CoverageSummary, FrequencyReport) {
    let mut agg = Aggregator::default();
    let mut mi = 0;
    let mut ii = 0;
    while mi < methods.len() || ii < instances.len() {
        let commit = match (methods.get(mi), instances.get(ii)) {
            (Some(m), _) => m.commit.as_str(),
            (None, Some(i)) => i.commit.as_str(),
            (None, None) => unreachable!(),
        };
        let m_end = mi + methods[mi..].iter().take_while(|m| m.commit == commit).count();
        let i_end = ii + instances[ii..].iter().take_while(|i| i.commit == commit).count();
        agg.push(&methods[mi..m_end], &instances[ii..i_end]);
        mi = m_end;
        ii = i_end;
    }
    agg.finish()
}

enum Prepared {
    Done(MethodRecord),
    Ready { file: String, key: String, diffed: DiffedPair },
}

fn empty_record(commit: &str, file: &str, key: &str, status: MethodStatus) -> MethodRecord {
    MethodRecord {
        commit: commit.to_string(),
        file: file.to_string(),
        method: key.to_string(),
        status,
        error: None,
        actions: 0,
        rename_covered: 0,
        instances: 0,
        lines: MethodLines::default(),
        counts: CoverageCounts::default(),
        coverage: Coverage::default(),
    }
}

/// Analyzes every modified method of one commit.
pub fn analyze_commit(
    repo: &Repository,
    id: Oid,
    records: &RecordIndex,
    config: &RepoRunConfig,
) -> Result<CommitResult, git2::Error> {
    let changes = method_changes(repo, id)?;
    let commit = changes.commit.clone();
    let mut out = CommitResult {
        commit: commit.clone(),
        files_with_syntax_errors: changes.files_with_syntax_errors,
        ..Default::default()
    };
    let mut prepared = Vec::new();
    for ch in changes.changes {
        match (ch.change_class, &ch.pre, &ch.post) {
            (ChangeClass::Added, ..) => out.methods_added += 1,
            (ChangeClass::Deleted, ..) => out.methods_deleted += 1,
            (ChangeClass::Modified, Some(pre), Some(post)) => {
                prepared.push(match diff_pair(pre, post, &config.match_config) {
                    Err(e) => {
                        log::warn!("{commit} {} {}: {e}", ch.file, ch.key);
                        let mut r = empty_record(&commit, &ch.file, &ch.key, MethodStatus::ParseError);
                        r.error = Some(e.to_string());
                        Prepared::Done(r)
                    }
                    Ok(d) if d.pruning != Pruning::Kept => {
                        let status = match d.pruning {
                            Pruning::OnlyInsertions => MethodStatus::OnlyInsertions,
                            _ => MethodStatus::OnlyDeletions,
                        };
                        let mut r = empty_record(&commit, &ch.file, &ch.key, status);
                        r.actions = d.script.len();
                        Prepared::Done(r)
                    }
                    Ok(diffed) => Prepared::Ready { file: ch.file, key: ch.key, diffed },
                });
            }
            (ChangeClass::Modified, ..) => unreachable!("modified methods have both versions"),
        }
    }
    let mut commit_records: Vec<RefactoringRecord> = records.for_commit(&commit).into_iter().cloned().collect();
    if config.infer_renames {
        let updates: Vec<_> = prepared
            .iter()
            .filter_map(|p| match p {
                Prepared::Ready { file, diffed, .. } => Some(name_updates(&diffed.script, file)),
                Prepared::Done(_) => None,
            })
            .flatten()
            .collect();
        commit_records.extend(infer_renames(&updates, &commit));
    }
    for p in prepared {
        let (file, key, diffed) = match p {
            Prepared::Done(r) => {
                out.methods.push(r);
                continue;
            }
            Prepared::Ready { file, key, diffed } => (file, key, diffed),
        };
        let here: Vec<&RefactoringRecord> = commit_records.iter().filter(|r| r.touches(&file)).collect();
        let actions = diffed.script.len();
        let a = diffed.finish(&here, Some(&file));
        let counts = a.lines.counts();
        for inst in &a.instances {
            out.instances.push(InstanceRecord {
                commit: commit.clone(),
                file: file.clone(),
                method: key.clone(),
                instance: inst.clone(),
            });
        }
        out.methods.push(MethodRecord {
            commit: commit.clone(),
            file,
            method: key,
            status: MethodStatus::Analyzed,
            error: None,
            actions,
            rename_covered: a.covered.len(),
            instances: a.instances.len(),
            lines: a.lines,
            counts,
            coverage: counts.ratios(),
        });
    }
    Ok(out)
}

fn add_stats(stats: &mut RunStats, c: &CommitResult, commit_counts: &CoverageCounts) {
    stats.commits += 1;
    stats.methods_added += c.methods_added;
    stats.methods_deleted += c.methods_deleted;
    stats.files_with_syntax_errors += c.files_with_syntax_errors;
    stats.instances += c.instances.len();
    let mut analyzed = 0;
    let mut pure = 0;
    for m in &c.methods {
        stats.processed_methods += 1;
        stats.rename_covered_actions += m.rename_covered;
        match m.status {
            MethodStatus::Analyzed => {
                analyzed += 1;
                if m.counts.crc > 0 {
                    stats.conditional_related_changes += 1;
                }
            }
            MethodStatus::OnlyInsertions => {
                pure += 1;
                stats.pruned_only_insertions += 1;
            }
            MethodStatus::OnlyDeletions => {
                pure += 1;
                stats.pruned_only_deletions += 1;
            }
            MethodStatus::ParseError => stats.parse_errors += 1,
        }
    }
    stats.analyzed_methods += analyzed;
    if !c.methods.is_empty() {
        stats.commits_with_method_changes += 1;
    }
    if pure == c.methods.len() && pure > 0 {
        stats.pure_commits += 1;
    }
    if analyzed > 0 {
        stats.processed_commits += 1;
    }
    if commit_counts.crc > 0 {
        stats.conditional_related_commits += 1;
    }
}

/// Commits analyzed per parallel batch; bounds memory on long histories.
const BATCH_PER_WORKER: usize = 16;

/// Mines the configured history, handing each commit's result to `sink` in
/// commit order. The report does not depend on the degree of parallelism.
pub fn run_pipeline_with(
    config: &RepoRunConfig,
    mut sink: impl FnMut(&CommitResult) -> Result<(), MiningError>,
) -> Result<RepoReport, MiningError> {
    if config.jobs == 0 {
        return Err(MiningError::NoWorkers);
    }
    let access = |source| MiningError::RepoAccess { path: config.repo.clone(), source };
    let mut records = Vec::new();
    if let Some(path) = &config.refactorings {
        records = load_refactoring_report(path)?;
    }
    let renames = match (config.refactorings.is_some(), config.infer_renames) {
        (false, false) => RenameSource::None,
        (true, false) => RenameSource::Report,
        (false, true) => RenameSource::Inferred,
        (true, true) => RenameSource::ReportAndInferred,
    };
    let index = RecordIndex::new(records);
    let repo = open(&config.repo)?;
    let (ids, merges) = commit_ids(&repo, config).map_err(access)?;
    drop(repo);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .expect("thread pool starts");
    let mut stats = RunStats { merge_commits_skipped: merges, ..Default::default() };
    let mut agg = Aggregator::default();
    let total = ids.len();
    for (n, batch) in ids.chunks(config.jobs * BATCH_PER_WORKER).enumerate() {
        let results: Vec<Result<CommitResult, MiningError>> = pool.install(|| {
            batch
                .par_iter()
                .map_init(
                    || open(&config.repo),
                    |repo, id| match repo {
                        Ok(repo) => analyze_commit(repo, *id, &index, config).map_err(access),
                        Err(e) => Err(MiningError::RepoAccess {
                            path: config.repo.clone(),
                            source: git2::Error::from_str(&e.to_string()),
                        }),
                    },
                )
                .collect()
        });
        for r in results {
            let r = r?;
            let counts = agg.push(&r.methods, &r.instances);
            add_stats(&mut stats, &r, &counts);
            sink(&r)?;
        }
        log::info!("{}/{} commits", (n * config.jobs * BATCH_PER_WORKER + batch.len()).min(total), total);
    }
    let (coverage, frequency) = agg.finish();
    Ok(RepoReport {
        schema_version: REPORT_SCHEMA_VERSION,
        repository: config.repo.display().to_string(),
        revision: config.branch.clone().unwrap_or_else(|| "HEAD".to_string()),
        renames,
        stats,
        coverage,
        frequency,
    })
}

fn output_error(path: &Path) -> impl Fn(std::io::Error) -> MiningError + '_ {
    move |source| MiningError::Output { path: path.to_path_buf(), source }
}

fn json_line<T: Serialize>(w: &mut impl Write, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}

/// Writes `report.json`, `instances.jsonl` and `methods.jsonl` into the
/// configured output directory, streaming records as commits complete.
pub fn run_pipeline(config: &RepoRunConfig) -> Result<RepoReport, MiningError> {
    let Some(dir) = config.out_dir.clone() else {
        return run_pipeline_with(config, |_| Ok(()));
    };
    std::fs::create_dir_all(&dir).map_err(output_error(&dir))?;
    let create = |name: &str| -> Result<(PathBuf, BufWriter<File>), MiningError> {
        let p = dir.join(name);
        let f = File::create(&p).map_err(output_error(&p))?;
        Ok((p, BufWriter::new(f)))
    };
    let (ip, mut instances) = create(INSTANCES_FILE)?;
    let (mp, mut methods) = create(METHODS_FILE)?;
    let report = run_pipeline_with(config, |c| {
        for i in &c.instances {
            json_line(&mut instances, i).map_err(output_error(&ip))?;
        }
        for m in &c.methods {
            json_line(&mut methods, m).map_err(output_error(&mp))?;
        }
        Ok(())
    })?;
    instances.flush().map_err(output_error(&ip))?;
    methods.flush().map_err(output_error(&mp))?;
    write_report(&dir, &report)?;
    Ok(report)
}

fn write_report(dir: &Path, report: &RepoReport) -> Result<(), MiningError> {
    let p = dir.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    std::fs::write(&p, text).map_err(output_error(&p))
}

/// The persisted output of a run.
#[derive(Clone, Debug)]
pub struct RunData {
    pub report: RepoReport,
    pub methods: Vec<MethodRecord>,
    pub instances: Vec<InstanceRecord>,
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, MiningError> {
    let corrupt = |message: String| MiningError::RunData { path: path.to_path_buf(), message };
    let f = File::open(path).map_err(|e| corrupt(e.to_string()))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| corrupt(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| corrupt(format!("line {}: {e}", n + 1)))?);
    }
    Ok(out)
}

pub fn read_run(dir: &Path) -> Result<RunData, MiningError> {
    let p = dir.join(REPORT_FILE);
    let text = std::fs::read_to_string(&p)
        .map_err(|e| MiningError::RunData { path: p.clone(), message: e.to_string() })?;
    let report: RepoReport = serde_json::from_str(&text)
        .map_err(|e| MiningError::RunData { path: p.clone(), message: e.to_string() })?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(MiningError::RunData {
            path: p,
            message: format!("unsupported schema_version {}", report.schema_version),
        });
    }
    Ok(RunData {
        report,
        methods: read_jsonl(&dir.join(METHODS_FILE))?,
        instances: read_jsonl(&dir.join(INSTANCES_FILE))?,
    })
}
