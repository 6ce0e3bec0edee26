//! `microchange`: detect conditional-related micro-changes in Java code.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 Java parse
//! error, 3 malformed refactoring report, 4 repository access failure,
//! 5 missing or corrupt run data, 64 usage error.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use microchange::ast::parse_method;
use microchange::catalog::catalog_json;
use microchange::mining::{self, diff_pair, MethodText, MiningError, RepoRunConfig};
use microchange::refactorings::{load_refactoring_report, RefactoringRecord, ReportFormatError};
use microchange::textdiff::{line_diff, project_script_to_lines};
use microchange::treediff::{derive_edit_script, match_trees, MatchConfig};

const EXIT_OUTPUT: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_REPORT_FORMAT: u8 = 3;
const EXIT_REPO: u8 = 4;
const EXIT_RUN_DATA: u8 = 5;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "microchange", version, about = "Detect conditional-related micro-changes in Java code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Format {
    /// Machine-readable JSON output (default).
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Human-readable output.
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct Matching {
    /// Smallest subtree height matched top-down.
    #[arg(long, default_value_t = MatchConfig::default().min_height)]
    min_height: usize,
    /// Minimum dice similarity for container matches.
    #[arg(long, default_value_t = MatchConfig::default().dice_threshold)]
    dice_threshold: f64,
    /// Largest unmatched region handled by recovery.
    #[arg(long, default_value_t = MatchConfig::default().max_recovery_size)]
    max_recovery_size: usize,
}

impl Matching {
    fn config(&self) -> MatchConfig {
        MatchConfig {
            min_height: self.min_height,
            dice_threshold: self.dice_threshold,
            max_recovery_size: self.max_recovery_size,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the normalized syntax tree of a single Java method.
    Parse { file: PathBuf },
    /// Print the edit script and changed lines between two versions of a method.
    Diff {
        pre: PathBuf,
        post: PathBuf,
        #[command(flatten)]
        format: Format,
        #[command(flatten)]
        matching: Matching,
    },
    /// Detect micro-changes between two versions of a method.
    Detect {
        pre: PathBuf,
        post: PathBuf,
        /// Refactoring report whose renames explain label updates.
        #[arg(long)]
        refactorings: Option<PathBuf>,
        /// Only use report records of this commit.
        #[arg(long, requires = "refactorings")]
        commit: Option<String>,
        /// Only use report records and locations in this repository path.
        #[arg(long, requires = "refactorings")]
        path: Option<String>,
        #[command(flatten)]
        format: Format,
        #[command(flatten)]
        matching: Matching,
    },
    /// Mine a Git repository and write a run directory.
    Mine {
        repo: PathBuf,
        /// Branch or revision to mine (default HEAD).
        #[arg(long)]
        branch: Option<String>,
        /// Only follow first parents.
        #[arg(long)]
        first_parent: bool,
        /// Worker threads.
        #[arg(long, env = "MICROCHANGE_JOBS", value_parser = clap::value_parser!(u16).range(1..))]
        jobs: Option<u16>,
        #[arg(long)]
        refactorings: Option<PathBuf>,
        /// Treat an identifier update repeated at least twice in a commit as a rename.
        #[arg(long)]
        infer_renames: bool,
        /// Output directory for report.json, instances.jsonl and methods.jsonl.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        format: Format,
        #[command(flatten)]
        matching: Matching,
    },
    /// Recompute coverage and frequency tables from one or more run directories.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Also write the frequency table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        format: Format,
    },
    /// Print the micro-change catalog as JSON.
    Catalog {
        /// Write to a file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<ReportFormatError> for Failure {
    fn from(e: ReportFormatError) -> Self {
        Failure::new(EXIT_REPORT_FORMAT, e.to_string())
    }
}

impl From<MiningError> for Failure {
    fn from(e: MiningError) -> Self {
        let code = match &e {
            MiningError::RepoAccess { .. } => EXIT_REPO,
            MiningError::Report(_) => EXIT_REPORT_FORMAT,
            MiningError::Output { .. } => EXIT_OUTPUT,
            MiningError::RunData { .. } => EXIT_RUN_DATA,
            MiningError::NoWorkers => EXIT_USAGE,
        };
        Failure::new(code, e.to_string())
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn parse_file(path: &Path) -> Result<(String, microchange::ast::Ast), Failure> {
    let text = read_input(path)?;
    let ast = parse_method(&text).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    Ok((text, ast))
}

fn emit(text: &str, to: Option<&Path>) -> Result<(), Failure> {
    match to {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::new(EXIT_OUTPUT, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Parse { file } => {
            let (_, ast) = parse_file(&file)?;
            emit(&ast.dump(), None)
        }
        Command::Diff { pre, post, format, matching } => {
            let (pre_text, a) = parse_file(&pre)?;
            let (post_text, b) = parse_file(&post)?;
            let m = match_trees(&a, &b, &matching.config());
            let script = derive_edit_script(&a, &b, &m).expect("matcher output is a valid mapping");
            let diff_text = line_diff(&pre_text, &post_text);
            let diff_tree = project_script_to_lines(&script, &a, &b);
            let out = if format.text {
                render::diff_text(&script, &diff_text, &diff_tree)
            } else {
                render::diff_json(&script, &diff_text, &diff_tree)
            };
            emit(&out, None)
        }
        Command::Detect { pre, post, refactorings, commit, path, format, matching } => {
            let records = match &refactorings {
                Some(p) => load_refactoring_report(p)?,
                None => Vec::new(),
            };
            let selected: Vec<&RefactoringRecord> = records
                .iter()
                .filter(|r| commit.as_deref().map_or(true, |c| r.commit.starts_with(c) || c.starts_with(&r.commit)))
                .filter(|r| path.as_deref().map_or(true, |f| r.touches(f)))
                .collect();
            let pre_text = MethodText { text: read_input(&pre)?, start_line: 1 };
            let post_text = MethodText { text: read_input(&post)?, start_line: 1 };
            let diffed = diff_pair(&pre_text, &post_text, &matching.config())
                .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
            let analysis = diffed.finish(&selected, path.as_deref());
            let out = if format.text { render::detect_text(&analysis) } else { render::detect_json(&analysis) };
            emit(&out, None)
        }
        Command::Mine { repo, branch, first_parent, jobs, refactorings, infer_renames, out, format, matching } => {
            let jobs = jobs
                .map(usize::from)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let config = RepoRunConfig {
                repo,
                branch,
                first_parent,
                jobs,
                match_config: matching.config(),
                refactorings,
                infer_renames,
                out_dir: Some(out),
            };
            let report = mining::run_pipeline(&config)?;
            let text = if format.text { render::mine_text(&report) } else { render::to_json(&report) };
            emit(&text, None)
        }
        Command::Report { runs, csv, format } => {
            let mut loaded = Vec::new();
            for dir in &runs {
                let data = mining::read_run(dir)?;
                let (coverage, frequency) = mining::summarize(&data.methods, &data.instances);
                if coverage != data.report.coverage || frequency != data.report.frequency {
                    return Err(Failure::new(
                        EXIT_RUN_DATA,
                        format!("{}: records disagree with report.json", dir.display()),
                    ));
                }
                loaded.push(render::RunSummary {
                    run: dir.display().to_string(),
                    repository: data.report.repository,
                    stats: data.report.stats,
                    coverage,
                    frequency,
                });
            }
            let combined = render::combine(&loaded);
            if let Some(p) = &csv {
                let table = combined.frequency.to_csv().map_err(|e| Failure::new(EXIT_OUTPUT, e.to_string()))?;
                emit(&table, Some(p))?;
            }
            let text = if format.text {
                render::report_text(&loaded, &combined)
            } else {
                render::report_json(&loaded, &combined)
            };
            emit(&text, None)
        }
        Command::Catalog { out } => emit(&catalog_json(), out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("microchange: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
