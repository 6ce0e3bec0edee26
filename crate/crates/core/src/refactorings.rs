//! Refactoring reports, rename downstream effects and refactoring line sets.
//!
//! Reports follow the common refactoring-miner JSON layout:
//!
//! ```json
//! {"commits": [{"sha1": "744c029", "refactorings": [{
//!     "type": "Rename Attribute",
//!     "description": "Rename Attribute delivered : boolean to dispatched : boolean in class X",
//!     "leftSideLocations":  [{"filePath": "src/X.java", "startLine": 26, "endLine": 26}],
//!     "rightSideLocations": [{"filePath": "src/X.java", "startLine": 27, "endLine": 27}]
//! }]}]}
//! ```
//!
//! Rename names come from optional `beforeName` / `afterName` fields when
//! present, else from the description.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::ast::NodeKind;
use crate::catalog::LineRange;
use crate::textdiff::LineSet;
use crate::treediff::{ActionId, EditOp, EditScript};

/// Kind given to renames inferred from repeated label updates.
pub const INFERRED_RENAME: &str = "Rename (inferred)";

#[derive(Debug, Error)]
pub enum ReportFormatError {
    #[error("{path}: cannot read report: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: invalid JSON: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: field `{field}`: {message}")]
    Field { path: PathBuf, field: String, message: String },
}

/// A line interval in one file.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FileLocation {
    pub file: String,
    pub lines: LineRange,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefactoringRecord {
    pub kind: String,
    pub is_rename: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub before_name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub after_name: String,
    pub file: String,
    pub pre_locations: Vec<FileLocation>,
    pub post_locations: Vec<FileLocation>,
    pub commit: String,
}

impl RefactoringRecord {
    /// Whether any location of the record lies in `file`.
    pub fn touches(&self, file: &str) -> bool {
        self.file == file || self.pre_locations.iter().chain(&self.post_locations).any(|l| l.file == file)
    }
}

/// "Rename-related" kinds are the ones whose name starts with "Rename".
pub fn is_rename_kind(kind: &str) -> bool {
    kind.starts_with("Rename")
}

pub fn load_refactoring_report(path: &Path) -> Result<Vec<RefactoringRecord>, ReportFormatError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ReportFormatError::Io { path: path.to_path_buf(), source })?;
    parse_refactoring_report(&text, path)
}

/// Parses report text; `path` is only used in error messages.
pub fn parse_refactoring_report(text: &str, path: &Path) -> Result<Vec<RefactoringRecord>, ReportFormatError> {
    let root: Value =
        serde_json::from_str(text).map_err(|source| ReportFormatError::Json { path: path.to_path_buf(), source })?;
    let bad = |field: String, message: &str| ReportFormatError::Field {
        path: path.to_path_buf(),
        field,
        message: message.to_string(),
    };
    let commits = root
        .get("commits")
        .ok_or_else(|| bad("commits".into(), "missing"))?
        .as_array()
        .ok_or_else(|| bad("commits".into(), "expected an array"))?;
    let mut out = Vec::new();
    for (ci, commit) in commits.iter().enumerate() {
        let at = format!("commits[{ci}]");
        let sha = commit
            .get("sha1")
            .or_else(|| commit.get("commit"))
            .and_then(Value::as_str)
            .ok_or_else(|| bad(format!("{at}.sha1"), "missing or not a string"))?;
        let refs = match commit.get("refactorings") {
            None | Some(Value::Null) => continue,
            Some(v) => v.as_array().ok_or_else(|| bad(format!("{at}.refactorings"), "expected an array"))?,
        };
        for (ri, r) in refs.iter().enumerate() {
            let at = format!("{at}.refactorings[{ri}]");
            let kind = r
                .get("type")
                .and_then(Value::as_str)
                .ok_or_else(|| bad(format!("{at}.type"), "missing or not a string"))?;
            let pre_locations = locations(r, "leftSideLocations", &at, &bad)?;
            let post_locations = locations(r, "rightSideLocations", &at, &bad)?;
            let is_rename = is_rename_kind(kind);
            let (before_name, after_name) = if is_rename {
                let explicit = (
                    r.get("beforeName").and_then(Value::as_str),
                    r.get("afterName").and_then(Value::as_str),
                );
                let names = match explicit {
                    (Some(b), Some(a)) => Some((simple_name(b), simple_name(a))),
                    _ => r.get("description").and_then(Value::as_str).and_then(|d| rename_names(kind, d)),
                };
                match names {
                    Some((b, a)) if !b.is_empty() && !a.is_empty() && b != a => (b, a),
                    _ => return Err(bad(format!("{at}.description"), "cannot determine renamed names")),
                }
            } else {
                (String::new(), String::new())
            };
            let file = post_locations
                .first()
                .or(pre_locations.first())
                .map(|l| l.file.clone())
                .unwrap_or_default();
            out.push(RefactoringRecord {
                kind: kind.to_string(),
                is_rename,
                before_name,
                after_name,
                file,
                pre_locations,
                post_locations,
                commit: sha.to_string(),
            });
        }
    }
    Ok(out)
}

fn locations(
    r: &Value,
    key: &str,
    at: &str,
    bad: &dyn Fn(String, &str) -> ReportFormatError,
) -> Result<Vec<FileLocation>, ReportFormatError> {
    let list = match r.get(key) {
        None | Some(Value::Null) => return Ok(Vec::new()),
        Some(v) => v.as_array().ok_or_else(|| bad(format!("{at}.{key}"), "expected an array"))?,
    };
    list.iter()
        .enumerate()
        .map(|(i, loc)| {
            let at = format!("{at}.{key}[{i}]");
            let file = loc
                .get("filePath")
                .and_then(Value::as_str)
                .ok_or_else(|| bad(format!("{at}.filePath"), "missing or not a string"))?;
            let line = |k: &str| {
                loc.get(k)
                    .and_then(Value::as_u64)
                    .ok_or_else(|| bad(format!("{at}.{k}"), "missing or not a non-negative integer"))
            };
            let start = line("startLine")?.max(1) as u32;
            let end = (line("endLine")? as u32).max(start);
            Ok(FileLocation { file: file.to_string(), lines: LineRange { start, end } })
        })
        .collect()
}

/// Last segment of a dotted name, without a trailing type or parameter list.
fn simple_name(s: &str) -> String {
    let s = s.split(" : ").next().unwrap_or(s);
    let s = s.split('(').next().unwrap_or(s).trim();
    let word = s.rsplit(char::is_whitespace).next().unwrap_or(s);
    word.rsplit('.').next().unwrap_or(word).to_string()
}

/// Old and new names from descriptions such as
/// `Rename Variable a : int to b : int in method ...` or
/// `Rename Method public f() : void renamed to public g() : void in class X`.
fn rename_names(kind: &str, description: &str) -> Option<(String, String)> {
    let rest = description.strip_prefix(kind).unwrap_or(description).trim_start();
    let (before, after) = rest.split_once(" renamed to ").or_else(|| rest.split_once(" to "))?;
    let after = after.split(" in ").next().unwrap_or(after);
    Some((simple_name(before), simple_name(after)))
}

/// Whether an update from `old` to `new` is the rename `before` -> `after`.
/// Dotted labels also match on their last segment with identical qualifiers.
fn is_rename_of(old: &str, new: &str, before: &str, after: &str) -> bool {
    if old == before && new == after {
        return true;
    }
    let split = |s: &str| match s.rsplit_once('.') {
        Some((q, n)) => (q.to_string(), n.to_string()),
        None => (String::new(), s.to_string()),
    };
    let (q1, n1) = split(old);
    let (q2, n2) = split(new);
    n1 == before && n2 == after && q1 == q2
}

/// Update actions explained by a rename record of the same commit and file.
pub fn classify_rename_effects(
    script: &EditScript,
    records: &[RefactoringRecord],
    commit: &str,
    file: &str,
) -> BTreeSet<ActionId> {
    let relevant: Vec<&RefactoringRecord> =
        records.iter().filter(|r| r.commit == commit && r.touches(file)).collect();
    rename_covered(script, &relevant)
}

/// Update actions explained by any rename among `records`, which the caller
/// has already narrowed to one commit and file.
pub fn rename_covered(script: &EditScript, records: &[&RefactoringRecord]) -> BTreeSet<ActionId> {
    let renames: BTreeSet<(&str, &str)> = records
        .iter()
        .filter(|r| r.is_rename)
        .map(|r| (r.before_name.as_str(), r.after_name.as_str()))
        .collect();
    if renames.is_empty() {
        return BTreeSet::new();
    }
    script
        .iter()
        .filter(|a| a.op == EditOp::Update)
        .filter(|a| {
            let new = a.new_value.as_deref().unwrap_or("");
            renames.iter().any(|(b, f)| is_rename_of(&a.node.label, new, b, f))
        })
        .map(|a| a.id)
        .collect()
}

/// Line sets of the rename and non-rename refactorings of one method pair.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefactoringLines {
    pub ref_rename: LineSet,
    pub ref_nonrename: LineSet,
    pub ref_total: LineSet,
}

/// Lines of every record location (in `file`, when given), split by rename
/// kind, plus the projected lines of rename-covered actions.
pub fn refactoring_lines<'r>(
    records: impl IntoIterator<Item = &'r RefactoringRecord>,
    file: Option<&str>,
    covered_action_lines: &LineSet,
) -> RefactoringLines {
    let mut out = RefactoringLines::default();
    let here = |l: &&FileLocation| file.map_or(true, |f| l.file == f);
    for r in records {
        let target = if r.is_rename { &mut out.ref_rename } else { &mut out.ref_nonrename };
        for l in r.pre_locations.iter().filter(here) {
            target.pre.extend(l.lines.start..=l.lines.end);
        }
        for l in r.post_locations.iter().filter(here) {
            target.post.extend(l.lines.start..=l.lines.end);
        }
    }
    out.ref_rename.extend(covered_action_lines);
    out.ref_total = out.ref_rename.union(&out.ref_nonrename);
    out
}

/// One update of an identifier, as seen while inferring renames.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct NameUpdate {
    pub file: String,
    pub old: String,
    pub new: String,
}

/// Identifier updates of a script: UPD actions on simple or qualified names.
pub fn name_updates(script: &EditScript, file: &str) -> Vec<NameUpdate> {
    script
        .iter()
        .filter(|a| a.op == EditOp::Update && matches!(a.node.kind, NodeKind::SimpleName | NodeKind::QualifiedName))
        .filter_map(|a| {
            let new = a.new_value.as_deref()?;
            let (old, new) = (simple_name(&a.node.label), simple_name(new));
            (old != new).then(|| NameUpdate { file: file.to_string(), old, new })
        })
        .collect()
}

/// Renames inferred for one commit: every identifier pair X -> Y updated at
/// least twice across the commit becomes a rename record in each file where
/// it occurs.
pub fn infer_renames(updates: &[NameUpdate], commit: &str) -> Vec<RefactoringRecord> {
    let mut counts: BTreeMap<(&str, &str), BTreeSet<&str>> = BTreeMap::new();
    let mut totals: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for u in updates {
        counts.entry((&u.old, &u.new)).or_default().insert(&u.file);
        *totals.entry((&u.old, &u.new)).or_default() += 1;
    }
    let mut out = Vec::new();
    for ((old, new), files) in counts {
        if totals[&(old, new)] < 2 {
            continue;
        }
        for file in files {
            out.push(RefactoringRecord {
                kind: INFERRED_RENAME.to_string(),
                is_rename: true,
                before_name: old.to_string(),
                after_name: new.to_string(),
                file: file.to_string(),
                pre_locations: Vec::new(),
                post_locations: Vec::new(),
                commit: commit.to_string(),
            });
        }
    }
    out
}

/// Records of a report grouped by commit, shared read-only across workers.
#[derive(Clone, Debug, Default)]
pub struct RecordIndex {
    by_commit: BTreeMap<String, Vec<RefactoringRecord>>,
}

impl RecordIndex {
    pub fn new(records: Vec<RefactoringRecord>) -> Self {
        let mut by_commit: BTreeMap<String, Vec<RefactoringRecord>> = BTreeMap::new();
        for r in records {
            by_commit.entry(r.commit.clone()).or_default().push(r);
        }
        RecordIndex { by_commit }
    }

    pub fn is_empty(&self) -> bool {
        self.by_commit.is_empty()
    }

    /// Records of `commit`; abbreviated ids match by prefix.
    pub fn for_commit(&self, commit: &str) -> Vec<&RefactoringRecord> {
        if let Some(rs) = self.by_commit.get(commit) {
            return rs.iter().collect();
        }
        self.by_commit
            .iter()
            .filter(|(k, _)| k.len() >= 7 && commit.starts_with(k.as_str()))
            .flat_map(|(_, rs)| rs)
            .collect()
    }
}
