//! Commit enumeration and changed-method extraction.

use std::collections::BTreeSet;
use std::path::Path;

use git2::{Delta, DiffOptions, Oid, Repository, Sort};
use serde::{Deserialize, Serialize};

use super::{MiningError, RepoRunConfig};
use crate::ast::{extract_methods, FileMethods};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeClass {
    Added,
    Deleted,
    Modified,
}

/// A method's text and the file line it starts on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodText {
    pub text: String,
    pub start_line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodChange {
    pub commit: String,
    pub file: String,
    pub key: String,
    pub pre: Option<MethodText>,
    pub post: Option<MethodText>,
    pub change_class: ChangeClass,
}

/// Changed methods of one commit, in (file, key) order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommitChanges {
    pub commit: String,
    pub changes: Vec<MethodChange>,
    /// Java files touched by the commit whose pre or post image has syntax
    /// errors; their intact methods are still compared.
    pub files_with_syntax_errors: usize,
}

pub(crate) fn open(path: &Path) -> Result<Repository, MiningError> {
    Repository::open(path).map_err(|source| MiningError::RepoAccess { path: path.to_path_buf(), source })
}

/// Non-merge commits reachable from the configured revision, oldest first.
/// Also returns how many merge commits were skipped.
pub fn commit_ids(repo: &Repository, config: &RepoRunConfig) -> Result<(Vec<Oid>, usize), git2::Error> {
    let tip = repo.revparse_single(config.branch.as_deref().unwrap_or("HEAD"))?.peel_to_commit()?;
    let mut walk = repo.revwalk()?;
    walk.set_sorting(Sort::TOPOLOGICAL | Sort::TIME | Sort::REVERSE)?;
    if config.first_parent {
        walk.simplify_first_parent()?;
    }
    walk.push(tip.id())?;
    let (mut out, mut merges) = (Vec::new(), 0);
    for oid in walk {
        let oid = oid?;
        if repo.find_commit(oid)?.parent_count() > 1 {
            merges += 1;
        } else {
            out.push(oid);
        }
    }
    Ok((out, merges))
}

fn blob_text(repo: &Repository, id: Oid) -> Result<Option<String>, git2::Error> {
    if id.is_zero() {
        return Ok(None);
    }
    let blob = repo.find_blob(id)?;
    Ok(Some(String::from_utf8_lossy(blob.content()).into_owned()))
}

/// Methods added, deleted or modified by `commit` relative to its parent.
/// A signature change shows up as one deletion plus one addition.
pub fn method_changes(repo: &Repository, commit: Oid) -> Result<CommitChanges, git2::Error> {
    let c = repo.find_commit(commit)?;
    let new_tree = c.tree()?;
    let old_tree = match c.parent_count() {
        0 => None,
        _ => Some(c.parent(0)?.tree()?),
    };
    let mut opts = DiffOptions::new();
    opts.skip_binary_check(true);
    let diff = repo.diff_tree_to_tree(old_tree.as_ref(), Some(&new_tree), Some(&mut opts))?;
    let id = commit.to_string();
    let mut out = CommitChanges { commit: id.clone(), ..Default::default() };
    for delta in diff.deltas() {
        if !matches!(delta.status(), Delta::Added | Delta::Deleted | Delta::Modified) {
            continue;
        }
        let Some(path) = delta.new_file().path().or(delta.old_file().path()) else { continue };
        let Some(file) = path.to_str().filter(|p| p.ends_with(".java")) else { continue };
        let parse = |text: Option<String>| text.map(|t| extract_methods(&t)).unwrap_or_default();
        let old: FileMethods = parse(blob_text(repo, delta.old_file().id())?);
        let new: FileMethods = parse(blob_text(repo, delta.new_file().id())?);
        if old.has_errors || new.has_errors {
            out.files_with_syntax_errors += 1;
        }
        let (a, b) = (old.by_key(), new.by_key());
        let keys: BTreeSet<&str> = a.keys().chain(b.keys()).copied().collect();
        for key in keys {
            let text = |m: &crate::ast::MethodSource| MethodText { text: m.text.clone(), start_line: m.start_line };
            let (pre, post) = (a.get(key).map(|m| text(m)), b.get(key).map(|m| text(m)));
            let change_class = match (&pre, &post) {
                (Some(x), Some(y)) if x.text == y.text => continue,
                (Some(_), Some(_)) => ChangeClass::Modified,
                (Some(_), None) => ChangeClass::Deleted,
                (None, _) => ChangeClass::Added,
            };
            out.changes.push(MethodChange {
                commit: id.clone(),
                file: file.to_string(),
                key: key.to_string(),
                pre,
                post,
                change_class,
            });
        }
    }
    out.changes.sort_by(|x, y| (&x.file, &x.key).cmp(&(&y.file, &y.key)));
    Ok(out)
}

/// Every method change of the configured history, oldest commit first.
pub fn derive_method_history(config: &RepoRunConfig) -> Result<Vec<MethodChange>, MiningError> {
    let access = |source| MiningError::RepoAccess { path: config.repo.clone(), source };
    let repo = open(&config.repo)?;
    let (ids, _) = commit_ids(&repo, config).map_err(access)?;
    let mut out = Vec::new();
    for id in ids {
        out.extend(method_changes(&repo, id).map_err(access)?.changes);
    }
    Ok(out)
}
