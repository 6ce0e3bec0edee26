//! Method-level history of a Git repository and the end-to-end detection
//! pipeline over it.

mod history;
mod pair;
mod pipeline;

pub use history::{
    commit_ids, derive_method_history, method_changes, ChangeClass, CommitChanges, MethodChange, MethodText,
};
pub use pair::{diff_pair, DiffedPair, MethodLines, PairAnalysis};
pub use pipeline::{
    analyze_commit, read_run, run_pipeline, run_pipeline_with, summarize, CommitResult, CoverageSummary,
    InstanceRecord, MethodRecord, MethodStatus, RenameSource, RepoReport, RunData, RunStats, INSTANCES_FILE,
    METHODS_FILE, REPORT_FILE,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::refactorings::ReportFormatError;
use crate::treediff::MatchConfig;

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("cannot access repository {path}: {source}")]
    RepoAccess { path: PathBuf, source: git2::Error },
    #[error(transparent)]
    Report(#[from] ReportFormatError),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("run data in {path} is missing or corrupt: {message}")]
    RunData { path: PathBuf, message: String },
    #[error("parallelism must be at least 1")]
    NoWorkers,
}

/// How one repository is mined.
#[derive(Clone, Debug)]
pub struct RepoRunConfig {
    pub repo: PathBuf,
    /// Branch, tag or other revision; HEAD when `None`.
    pub branch: Option<String>,
    /// Follow only first parents instead of every commit reachable from the
    /// branch tip.
    pub first_parent: bool,
    pub jobs: usize,
    pub match_config: MatchConfig,
    pub refactorings: Option<PathBuf>,
    /// Treat repeated identical identifier updates in a commit as renames.
    pub infer_renames: bool,
    pub out_dir: Option<PathBuf>,
}

impl RepoRunConfig {
    pub fn new(repo: impl Into<PathBuf>) -> Self {
        RepoRunConfig {
            repo: repo.into(),
            branch: None,
            first_parent: false,
            jobs: 1,
            match_config: MatchConfig::default(),
            refactorings: None,
            infer_renames: false,
            out_dir: None,
        }
    }
}
