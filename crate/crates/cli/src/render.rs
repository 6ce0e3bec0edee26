//! JSON and text renderings of command results.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use microchange::catalog::MicroChangeInstance;
use microchange::metrics::{mean_coverage, Coverage, FrequencyReport, REPORT_SCHEMA_VERSION};
use microchange::mining::{CoverageSummary, MethodLines, PairAnalysis, RepoReport, RunStats};
use microchange::textdiff::{project_action, LineSet};
use microchange::treediff::{ActionId, EditAction, EditScript};
use serde::Serialize;

/// Share of the three most frequent types in the reference study's table.
pub const REFERENCE_TOP3_MASS: f64 = 0.281 + 0.246 + 0.119;

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn lines(set: &LineSet) -> String {
    let side = |s: &std::collections::BTreeSet<u32>| s.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    format!("pre [{}] post [{}]", side(&set.pre), side(&set.post))
}

fn describe(a: &EditAction) -> String {
    let mut s = format!("{:>3} {} {}", a.id, a.op.name(), a.node.kind);
    if !a.node.label.is_empty() {
        let _ = write!(s, " [{}]", a.node.label);
    }
    let _ = write!(s, " {}", a.node.range);
    if let Some(v) = &a.new_value {
        let _ = write!(s, " -> [{v}]");
    }
    if let Some(p) = &a.parent {
        let _ = write!(s, " under {} {}", p.kind, p.range);
    }
    if let Some(i) = a.position {
        let _ = write!(s, " at {i}");
    }
    s
}

#[derive(Serialize)]
struct DiffOutput<'a> {
    schema_version: u32,
    actions: &'a [EditAction],
    diff_text: &'a LineSet,
    diff_tree: &'a LineSet,
}

pub fn diff_json(script: &EditScript, diff_text: &LineSet, diff_tree: &LineSet) -> String {
    to_json(&DiffOutput { schema_version: REPORT_SCHEMA_VERSION, actions: &script.actions, diff_text, diff_tree })
}

pub fn diff_text(script: &EditScript, diff_text: &LineSet, diff_tree: &LineSet) -> String {
    let mut out = String::new();
    for a in script.iter() {
        let _ = writeln!(out, "{}", describe(a));
    }
    let _ = writeln!(out, "{} actions", script.len());
    let _ = writeln!(out, "text diff: {}", lines(diff_text));
    let _ = writeln!(out, "tree diff: {}", lines(diff_tree));
    out
}

#[derive(Serialize)]
struct DetectedInstance<'a> {
    #[serde(flatten)]
    instance: &'a MicroChangeInstance,
    consumed_lines: LineSet,
}

#[derive(Serialize)]
struct DetectOutput<'a> {
    schema_version: u32,
    count: usize,
    instances: Vec<DetectedInstance<'a>>,
    rename_covered: Vec<ActionId>,
    lines: &'a MethodLines,
    coverage: Coverage,
}

fn consumed(a: &PairAnalysis, i: &MicroChangeInstance) -> LineSet {
    let mut out = LineSet::new();
    for id in &i.actions {
        if let Some(action) = a.diffed.script.get(*id) {
            out.extend(&project_action(action, &a.diffed.pre, &a.diffed.post));
        }
    }
    out
}

pub fn detect_json(a: &PairAnalysis) -> String {
    to_json(&DetectOutput {
        schema_version: REPORT_SCHEMA_VERSION,
        count: a.instances.len(),
        instances: a
            .instances
            .iter()
            .map(|i| DetectedInstance { instance: i, consumed_lines: consumed(a, i) })
            .collect(),
        rename_covered: a.covered.iter().copied().collect(),
        lines: &a.lines,
        coverage: a.lines.counts().ratios(),
    })
}

fn ratio(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{:.3}", v))
}

fn coverage_line(label: &str, c: &Coverage) -> String {
    format!(
        "{label}: coverage {} / micro-changes {} / refactorings {}\n",
        ratio(c.coverage),
        ratio(c.coverage_mc),
        ratio(c.coverage_rm)
    )
}

pub fn detect_text(a: &PairAnalysis) -> String {
    let mut out = String::new();
    for i in &a.instances {
        let _ = writeln!(
            out,
            "{} at {} line {}-{} (actions {}) lines {}",
            i.kind,
            match i.anchor.side {
                microchange::treediff::Side::Pre => "pre",
                microchange::treediff::Side::Post => "post",
            },
            i.anchor.line_range.start,
            i.anchor.line_range.end,
            i.actions.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            lines(&consumed(a, i)),
        );
    }
    let _ = writeln!(out, "{} micro-change(s)", a.instances.len());
    if !a.covered.is_empty() {
        let _ = writeln!(out, "{} update(s) explained by renames", a.covered.len());
    }
    let _ = writeln!(out, "conditional-related lines: {}", lines(&a.lines.crc));
    out.push_str(&coverage_line("method", &a.lines.counts().ratios()));
    out
}

fn stats_text(s: &RunStats) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Processed commits: {} (of {} non-merge commits; {} merge commits skipped; {} pure)",
        s.processed_commits, s.commits, s.merge_commits_skipped, s.pure_commits
    );
    let _ = writeln!(
        out,
        "Processed methods: {} (analyzed {}, insertion-only {}, deletion-only {}, parse errors {})",
        s.processed_methods, s.analyzed_methods, s.pruned_only_insertions, s.pruned_only_deletions, s.parse_errors
    );
    let _ = writeln!(out, "Methods added / deleted: {} / {}", s.methods_added, s.methods_deleted);
    let _ = writeln!(out, "Conditional-related commits: {}", s.conditional_related_commits);
    let _ = writeln!(out, "Conditional-related changes: {}", s.conditional_related_changes);
    let _ = writeln!(out, "Micro-changes: {}", s.instances);
    if s.rename_covered_actions > 0 {
        let _ = writeln!(out, "Updates explained by renames: {}", s.rename_covered_actions);
    }
    out
}

fn frequency_text(f: &FrequencyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>4}  {:<32} {:>11} {:>9}", "rank", "micro-change", "occurrences", "frequency");
    for e in f.entries.iter().filter(|e| e.occurrences > 0) {
        let freq = e.frequency.map_or_else(String::new, |x| format!("{:.1}%", x * 100.0));
        let _ = writeln!(out, "{:>4}  {:<32} {:>11} {:>9}", e.rank, e.micro_change.name(), e.occurrences, freq);
    }
    let _ = writeln!(out, "total {}", f.total);
    out
}

pub fn mine_text(r: &RepoReport) -> String {
    let mut out = stats_text(&r.stats);
    out.push_str(&coverage_line("Coverage (mean over commits)", &r.coverage.commit_mean));
    out.push_str(&frequency_text(&r.frequency));
    out
}

pub struct RunSummary {
    pub run: String,
    pub repository: String,
    pub stats: RunStats,
    pub coverage: CoverageSummary,
    pub frequency: FrequencyReport,
}

#[derive(Serialize)]
pub struct Combined {
    pub runs: usize,
    /// Mean of the per-run commit means.
    pub repo_weighted: Coverage,
    /// Mean over all commits of all runs.
    pub commit_weighted: Coverage,
    pub frequency: FrequencyReport,
    pub top3_mass: Option<f64>,
    pub reference_top3_mass: f64,
}

pub fn combine(runs: &[RunSummary]) -> Combined {
    let (repo_weighted, _) = mean_coverage(runs.iter().map(|r| &r.coverage.commit_mean));
    let n: usize = runs.iter().map(|r| r.coverage.commits_with_crc).sum();
    let commit_weighted = if n == 0 {
        Coverage::default()
    } else {
        let w = |f: fn(&Coverage) -> Option<f64>| {
            Some(
                runs.iter()
                    .filter_map(|r| f(&r.coverage.commit_mean).map(|x| x * r.coverage.commits_with_crc as f64))
                    .sum::<f64>()
                    / n as f64,
            )
        };
        Coverage { coverage: w(|c| c.coverage), coverage_mc: w(|c| c.coverage_mc), coverage_rm: w(|c| c.coverage_rm) }
    };
    let mut counts = BTreeMap::new();
    for r in runs {
        for e in &r.frequency.entries {
            *counts.entry(e.micro_change).or_insert(0) += e.occurrences;
        }
    }
    let frequency = FrequencyReport::from_counts(&counts);
    Combined {
        runs: runs.len(),
        repo_weighted,
        commit_weighted,
        top3_mass: frequency.top_mass(3),
        frequency,
        reference_top3_mass: REFERENCE_TOP3_MASS,
    }
}

#[derive(Serialize)]
struct RunOutput<'a> {
    run: &'a str,
    repository: &'a str,
    stats: &'a RunStats,
    coverage: &'a CoverageSummary,
    frequency: &'a FrequencyReport,
}

#[derive(Serialize)]
struct ReportOutput<'a> {
    schema_version: u32,
    runs: Vec<RunOutput<'a>>,
    combined: &'a Combined,
}

pub fn report_json(runs: &[RunSummary], combined: &Combined) -> String {
    to_json(&ReportOutput {
        schema_version: REPORT_SCHEMA_VERSION,
        runs: runs
            .iter()
            .map(|r| RunOutput {
                run: &r.run,
                repository: &r.repository,
                stats: &r.stats,
                coverage: &r.coverage,
                frequency: &r.frequency,
            })
            .collect(),
        combined,
    })
}

pub fn report_text(runs: &[RunSummary], combined: &Combined) -> String {
    let mut out = String::new();
    for r in runs {
        let _ = writeln!(out, "== {} ({})", r.run, r.repository);
        out.push_str(&stats_text(&r.stats));
        out.push_str(&coverage_line("Coverage (mean over commits)", &r.coverage.commit_mean));
        out.push('\n');
    }
    if runs.len() > 1 {
        out.push_str(&coverage_line("Repository-weighted", &combined.repo_weighted));
    }
    out.push_str(&coverage_line("Commit-weighted", &combined.commit_weighted));
    out.push_str(&frequency_text(&combined.frequency));
    let _ = writeln!(
        out,
        "top-3 share {} (reference corpus {:.1}%)",
        combined.top3_mass.map_or_else(|| "n/a".to_string(), |x| format!("{:.1}%", x * 100.0)),
        combined.reference_top3_mass * 100.0
    );
    out
}
