//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `MICROCHANGE_ACCEPTANCE_REPO` points criteria 5, 7 and 8 at an existing
//! Java repository instead of a generated one; `MICROCHANGE_ACCEPTANCE_COMMITS`
//! sets the size of the generated history (default 2000).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use microchange::ast::parse_method;
use microchange::catalog::{detect_micro_changes, MicroChangeInstance, MicroChangeType};
use microchange::metrics::CoverageCounts;
use microchange::mining::{
    diff_pair, read_run, run_pipeline, summarize, MethodText, PairAnalysis, RepoReport, RepoRunConfig, RunData,
    INSTANCES_FILE, METHODS_FILE, REPORT_FILE,
};
use microchange::refactorings::{load_refactoring_report, RefactoringRecord};
use microchange::textdiff::{line_diff, LineSet};
use microchange::treediff::{apply_edit_script, derive_edit_script, match_trees, MatchConfig, Side};
use microchange_testgen::fixtures::{load_dir, Fixture};
use microchange_testgen::{random_pair, synthetic_history};

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn fixtures() -> Vec<Fixture> {
    load_dir(&manifest().join("../core/fixtures")).expect("fixture corpus loads")
}

fn detect(pre: &str, post: &str) -> Vec<MicroChangeInstance> {
    let a = parse_method(pre).unwrap();
    let b = parse_method(post).unwrap();
    let m = match_trees(&a, &b, &MatchConfig::default());
    let s = derive_edit_script(&a, &b, &m).unwrap();
    detect_micro_changes(&s, &m, &a, &b)
}

fn labels(found: &[MicroChangeInstance]) -> Vec<String> {
    let mut v: Vec<String> = found
        .iter()
        .map(|i| {
            let side = if i.anchor.side == Side::Pre { "pre" } else { "post" };
            format!("{}@{}:{}", i.kind, side, i.anchor.line_range.start)
        })
        .collect();
    v.sort();
    v
}

type Outcome = (bool, String);

fn fixture_suite() -> Outcome {
    let start = Instant::now();
    let all = fixtures();
    let mut wrong = Vec::new();
    let mut per_type = std::collections::BTreeMap::new();
    for f in &all {
        let got = labels(&detect(&f.pre, &f.post));
        let want: Vec<String> = f.expect.iter().map(|e| e.to_string()).collect();
        if got != want {
            wrong.push(f.name.clone());
        }
        for e in &f.expect {
            *per_type.entry(e.kind.clone()).or_insert(0usize) += 1;
        }
    }
    let elapsed = start.elapsed();
    let positives = all.iter().filter(|f| !f.is_negative()).count();
    let negatives = all.iter().filter(|f| f.is_negative()).count();
    let min_per_type = MicroChangeType::ALL.iter().map(|t| per_type.get(t.name()).copied().unwrap_or(0)).min().unwrap();
    let ok = wrong.is_empty() && positives >= 40 && negatives >= 20 && min_per_type >= 2 && elapsed < Duration::from_secs(10);
    (
        ok,
        format!(
            "{positives} positive + {negatives} negative pairs, >= {min_per_type} per type, {} mismatched {:?}, {:.2}s",
            wrong.len(),
            wrong,
            elapsed.as_secs_f64()
        ),
    )
}

fn mbassador(with_report: bool) -> PairAnalysis {
    let data = manifest().join("tests/data/mbassador");
    let read = |n: &str| std::fs::read_to_string(data.join(n)).unwrap();
    // The method sits at file line 53 before and 56 after the commit.
    let pre = MethodText { text: read("pre.java"), start_line: 53 };
    let post = MethodText { text: read("post.java"), start_line: 56 };
    let records = if with_report { load_refactoring_report(&data.join("report.json")).unwrap() } else { vec![] };
    let file = "src/main/java/net/engio/mbassy/subscription/SubscriptionContext.java";
    let selected: Vec<&RefactoringRecord> = records.iter().filter(|r| r.commit == "744c029" && r.touches(file)).collect();
    diff_pair(&pre, &post, &MatchConfig::default()).unwrap().finish(&selected, Some(file))
}

fn paper_corpus() -> Outcome {
    let start = Instant::now();
    let all = fixtures();
    let get = |name: &str| all.iter().find(|f| f.name == name).unwrap_or_else(|| panic!("fixture {name}"));
    let kinds = |f: &Fixture| -> BTreeSet<MicroChangeType> { detect(&f.pre, &f.post).iter().map(|i| i.kind).collect() };
    let zuul = get("paper_zuul_add_conjunct");
    let zuul_ok = labels(&detect(&zuul.pre, &zuul.post)) == ["AddConjunctOrDisjunct@pre:2"];
    let hikari_ok = kinds(get("paper_hikari_inversion")).contains(&MicroChangeType::ReverseCondition);
    let retro = kinds(get("paper_retrolambda_compound"));
    let retro_ok = retro.contains(&MicroChangeType::RemoveConjunctOrDisjunct);
    let with = mbassador(true);
    let without = mbassador(false);
    let without_kinds: BTreeSet<_> = without.instances.iter().map(|i| (i.anchor, i.kind)).collect();
    let mbassador_ok = with.covered.len() == 1
        && with.instances.iter().all(|i| i.actions.iter().all(|a| !with.covered.contains(a)))
        && with.instances.iter().all(|i| without_kinds.contains(&(i.anchor, i.kind)));
    let elapsed = start.elapsed();
    (
        zuul_ok && hikari_ok && retro_ok && mbassador_ok && elapsed < Duration::from_secs(10),
        format!(
            "zuul {zuul_ok}, hikari {hikari_ok}, retrolambda {retro_ok} {:?}, mbassador {mbassador_ok} ({} update excluded, {} detections), {:.2}s",
            retro,
            with.covered.len(),
            with.instances.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn soundness() -> Outcome {
    let mut bad = Vec::new();
    for seed in 0..200 {
        let (pre, post, _) = random_pair(seed);
        let a = parse_method(&pre).unwrap();
        let b = parse_method(&post).unwrap();
        let m = match_trees(&a, &b, &MatchConfig::default());
        let ok = derive_edit_script(&a, &b, &m)
            .and_then(|s| apply_edit_script(&a, &s))
            .map(|t| t.isomorphic_to(&b))
            .unwrap_or(false);
        if !ok {
            bad.push(seed);
        }
    }
    (bad.is_empty(), format!("{}/200 pairs reproduced, failing seeds {bad:?}", 200 - bad.len()))
}

fn line_oracle() -> Outcome {
    fn lcs(a: &[&str], b: &[&str]) -> usize {
        let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in (0..a.len()).rev() {
            for j in (0..b.len()).rev() {
                t[i][j] = if a[i] == b[j] { t[i + 1][j + 1] + 1 } else { t[i + 1][j].max(t[i][j + 1]) };
            }
        }
        t[0][0]
    }
    let mut seqs: Vec<Vec<&str>> = vec![vec![]];
    for len in 1..=8 {
        for bits in 0..(1u32 << len) {
            seqs.push((0..len).map(|i| if bits >> i & 1 == 0 { "x" } else { "y" }).collect());
        }
    }
    let kept = |lines: &[&'static str], changed: &BTreeSet<u32>| -> Vec<&'static str> {
        lines.iter().enumerate().filter(|(i, _)| !changed.contains(&(*i as u32 + 1))).map(|(_, l)| *l).collect()
    };
    let mut pairs = 0usize;
    let mut mismatches = 0usize;
    for a in &seqs {
        for b in &seqs {
            pairs += 1;
            let d = line_diff(&a.join("\n"), &b.join("\n"));
            let optimal = a.len() + b.len() - 2 * lcs(a, b);
            if d.len() != optimal || kept(a, &d.pre) != kept(b, &d.post) {
                mismatches += 1;
            }
        }
    }
    (mismatches == 0, format!("{pairs} sequence pairs, {mismatches} mismatches"))
}

struct MinedRun {
    dir: PathBuf,
    source: String,
    commits: usize,
    elapsed: Duration,
    peak_rss_kib: Option<u64>,
    report: RepoReport,
}

fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn mine_large(work: &Path) -> MinedRun {
    let (repo, source) = match std::env::var_os("MICROCHANGE_ACCEPTANCE_REPO") {
        Some(p) => (PathBuf::from(&p), format!("repository {}", PathBuf::from(p).display())),
        None => {
            let commits = std::env::var("MICROCHANGE_ACCEPTANCE_COMMITS")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(2000);
            let repo = work.join("history");
            synthetic_history(&repo, commits, 2024).expect("synthetic history builds");
            (repo, format!("generated {commits}-commit repository"))
        }
    };
    let dir = work.join("large-run");
    let mut cfg = RepoRunConfig::new(&repo);
    cfg.jobs = 4;
    cfg.out_dir = Some(dir.clone());
    let start = Instant::now();
    let report = run_pipeline(&cfg).expect("mining succeeds");
    let elapsed = start.elapsed();
    MinedRun {
        dir,
        source,
        commits: report.stats.commits,
        elapsed,
        peak_rss_kib: peak_rss_kib(),
        report,
    }
}

fn metric_identities(run: &MinedRun) -> Outcome {
    let RunData { methods, instances, .. } = read_run(&run.dir).expect("run data reads");
    let mut scopes = 0usize;
    let mut violations = 0usize;
    let mut check = |c: &microchange::metrics::Coverage| {
        if c.is_defined() {
            scopes += 1;
        }
        if !c.identities_hold() {
            violations += 1;
        }
    };
    let mut commit = CoverageCounts::default();
    for (i, m) in methods.iter().enumerate() {
        check(&m.coverage);
        commit.add(&m.counts);
        if methods.get(i + 1).map_or(true, |n| n.commit != m.commit) {
            check(&commit.ratios());
            commit = CoverageCounts::default();
        }
    }
    check(&run.report.coverage.commit_mean);
    check(&run.report.coverage.pooled);
    let (recomputed, freq) = summarize(&methods, &instances);
    let freq_sum: f64 = freq.entries.iter().filter_map(|e| e.frequency).sum();
    let freq_ok = freq.total == 0 || (freq_sum - 1.0).abs() <= 1e-9;
    let ok = violations == 0 && freq_ok && recomputed == run.report.coverage && scopes > 0;
    (ok, format!("{scopes} defined scopes, {violations} violations, sum freq = {freq_sum:.12} over {} instances", freq.total))
}

fn determinism(work: &Path) -> Outcome {
    let repo = work.join("small-history");
    synthetic_history(&repo, 150, 7).expect("history builds");
    let mut outputs = Vec::new();
    for jobs in [1, 8] {
        let dir = work.join(format!("det-{jobs}"));
        let mut cfg = RepoRunConfig::new(&repo);
        cfg.jobs = jobs;
        cfg.out_dir = Some(dir.clone());
        run_pipeline(&cfg).expect("mining succeeds");
        outputs.push([REPORT_FILE, INSTANCES_FILE, METHODS_FILE].map(|f| std::fs::read(dir.join(f)).unwrap()));
    }
    let same = outputs[0] == outputs[1];
    let sizes: Vec<usize> = outputs[0].iter().map(Vec::len).collect();
    (same, format!("--jobs 1 vs 8 on 150 commits, files identical: {same}, sizes {sizes:?} bytes"))
}

fn performance(run: &MinedRun) -> Outcome {
    let limit = Duration::from_secs(600);
    let rss_ok = run.peak_rss_kib.map_or(true, |k| k < 2 * 1024 * 1024);
    (
        run.elapsed < limit && rss_ok && run.commits >= 1,
        format!(
            "{} ({} non-merge commits) mined in {:.1}s with 4 jobs, peak RSS {}",
            run.source,
            run.commits,
            run.elapsed.as_secs_f64(),
            run.peak_rss_kib.map_or("unknown".to_string(), |k| format!("{} MiB", k / 1024))
        ),
    )
}

fn rank_table(run: &MinedRun) -> Outcome {
    let f = &run.report.frequency;
    let top: Vec<String> = f
        .entries
        .iter()
        .take(3)
        .map(|e| format!("{} {:.1}%", e.micro_change, e.frequency.unwrap_or(0.0) * 100.0))
        .collect();
    let mass = f.top_mass(3).unwrap_or(0.0);
    let enough = f.total >= 500;
    (
        enough && f.is_well_formed(),
        format!(
            "{} instances, table well-formed: {}, top-3 {:?} = {:.1}% (reference 64.6%, diagnostic only)",
            f.total,
            f.is_well_formed(),
            top,
            mass * 100.0
        ),
    )
}

fn rename_exclusion() -> Outcome {
    let with = mbassador(true);
    let without = mbassador(false);
    let covered = {
        let mut l = LineSet::new();
        for id in &with.covered {
            let a = with.diffed.script.get(*id).unwrap();
            l.extend(&microchange::textdiff::project_action(a, &with.diffed.pre, &with.diffed.post));
        }
        l
    };
    let in_ref = covered.is_subset(&with.lines.ref_rename);
    let out_of_mc = covered.intersection(&with.lines.mc).is_empty();
    let ref_without = without.lines.ref_rename.union(&without.lines.ref_nonrename);
    let without_ok = covered.intersection(&ref_without).is_empty();
    let cov = |a: &PairAnalysis| a.lines.counts().ratios().coverage.unwrap_or(0.0);
    let (cw, co) = (cov(&with), cov(&without));
    (
        !covered.is_empty() && in_ref && out_of_mc && without_ok && cw >= co,
        format!(
            "covered lines {covered:?} in Ref^rename {in_ref}, outside MC {out_of_mc}; coverage with report {cw:.3} >= without {co:.3}"
        ),
    )
}

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "catalog fixture suite", fixture_suite()));
    results.push((2, "paper-example mini-corpus", paper_corpus()));
    results.push((3, "edit-script soundness", soundness()));
    results.push((4, "line-diff oracle", line_oracle()));
    let large = mine_large(work.path());
    results.push((5, "metric identities", metric_identities(&large)));
    results.push((6, "determinism", determinism(work.path())));
    results.push((7, "mining performance", performance(&large)));
    results.push((8, "rank table diagnostic", rank_table(&large)));
    results.push((9, "rename exclusion", rename_exclusion()));
    let mut failed = 0;
    for (n, name, (ok, detail)) in &results {
        if !ok {
            failed += 1;
        }
        println!("{} criterion {n} ({name}): {detail}", if *ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
