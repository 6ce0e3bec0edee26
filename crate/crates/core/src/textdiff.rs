//! Line-level diffs and projection of tree actions onto source lines.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use similar::{capture_diff_slices, Algorithm, DiffOp};

use crate::ast::{Ast, NodeId};
use crate::treediff::{EditAction, EditOp, EditScript, Side};

/// Changed line numbers on each side, 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineSet {
    pub pre: BTreeSet<u32>,
    pub post: BTreeSet<u32>,
}

impl LineSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_lines(pre: impl IntoIterator<Item = u32>, post: impl IntoIterator<Item = u32>) -> Self {
        LineSet { pre: pre.into_iter().collect(), post: post.into_iter().collect() }
    }

    pub fn side(&self, side: Side) -> &BTreeSet<u32> {
        match side {
            Side::Pre => &self.pre,
            Side::Post => &self.post,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut BTreeSet<u32> {
        match side {
            Side::Pre => &mut self.pre,
            Side::Post => &mut self.post,
        }
    }

    pub fn insert(&mut self, side: Side, line: u32) {
        self.side_mut(side).insert(line);
    }

    pub fn is_empty(&self) -> bool {
        self.pre.is_empty() && self.post.is_empty()
    }

    /// Total number of lines, both sides summed.
    pub fn len(&self) -> usize {
        self.pre.len() + self.post.len()
    }

    pub fn union(&self, other: &LineSet) -> LineSet {
        LineSet {
            pre: self.pre.union(&other.pre).copied().collect(),
            post: self.post.union(&other.post).copied().collect(),
        }
    }

    pub fn intersection(&self, other: &LineSet) -> LineSet {
        LineSet {
            pre: self.pre.intersection(&other.pre).copied().collect(),
            post: self.post.intersection(&other.post).copied().collect(),
        }
    }

    pub fn extend(&mut self, other: &LineSet) {
        self.pre.extend(other.pre.iter().copied());
        self.post.extend(other.post.iter().copied());
    }

    pub fn is_subset(&self, other: &LineSet) -> bool {
        self.pre.is_subset(&other.pre) && self.post.is_subset(&other.post)
    }

    /// Moves line numbers by the given offsets, e.g. from method-relative to
    /// file coordinates.
    pub fn shifted(&self, pre_offset: u32, post_offset: u32) -> LineSet {
        LineSet {
            pre: self.pre.iter().map(|l| l + pre_offset).collect(),
            post: self.post.iter().map(|l| l + post_offset).collect(),
        }
    }
}

/// Splits on `\n`; a trailing newline does not start an extra line.
fn split_lines(text: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    lines
}

/// Above this many table cells the diff falls back to `similar`'s Myers
/// implementation, whose tie-breaking is not side-symmetric.
const TABLE_LIMIT: usize = 16_000_000;

/// Lines deleted or modified in `pre_text` and added or modified in
/// `post_text`, from a shortest line edit script.
///
/// Among equally short scripts the choice is symmetric: swapping the two
/// texts swaps the two sides of the result.
pub fn line_diff(pre_text: &str, post_text: &str) -> LineSet {
    let a = split_lines(pre_text);
    let b = split_lines(post_text);
    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let suffix = a[prefix..]
        .iter()
        .rev()
        .zip(b[prefix..].iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    let (ma, mb) = (&a[prefix..a.len() - suffix], &b[prefix..b.len() - suffix]);
    let (dels, inss) = if (ma.len() + 1) * (mb.len() + 1) <= TABLE_LIMIT {
        symmetric_diff(ma, mb)
    } else {
        myers_diff(ma, mb)
    };
    LineSet {
        pre: dels.into_iter().map(|i| (prefix + i) as u32 + 1).collect(),
        post: inss.into_iter().map(|j| (prefix + j) as u32 + 1).collect(),
    }
}

/// LCS table walk. When skipping either line is optimal, the line with the
/// smaller text is skipped, which does not depend on argument order.
fn symmetric_diff(a: &[&str], b: &[&str]) -> (Vec<usize>, Vec<usize>) {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut t = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            t[i * w + j] = if a[i] == b[j] {
                t[(i + 1) * w + j + 1] + 1
            } else {
                t[(i + 1) * w + j].max(t[i * w + j + 1])
            };
        }
    }
    let (mut dels, mut inss) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] {
            i += 1;
            j += 1;
            continue;
        }
        let skip_a = t[(i + 1) * w + j];
        let skip_b = t[i * w + j + 1];
        if skip_a > skip_b || (skip_a == skip_b && a[i] < b[j]) {
            dels.push(i);
            i += 1;
        } else {
            inss.push(j);
            j += 1;
        }
    }
    dels.extend(i..n);
    inss.extend(j..m);
    (dels, inss)
}

fn myers_diff(a: &[&str], b: &[&str]) -> (Vec<usize>, Vec<usize>) {
    let (mut dels, mut inss) = (Vec::new(), Vec::new());
    for op in capture_diff_slices(Algorithm::Myers, a, b) {
        match op {
            DiffOp::Equal { .. } => {}
            DiffOp::Delete { old_index, old_len, .. } => dels.extend(old_index..old_index + old_len),
            DiffOp::Insert { new_index, new_len, .. } => inss.extend(new_index..new_index + new_len),
            DiffOp::Replace { old_index, old_len, new_index, new_len } => {
                dels.extend(old_index..old_index + old_len);
                inss.extend(new_index..new_index + new_len);
            }
        }
    }
    (dels, inss)
}

fn rows(ast: &Ast, id: NodeId) -> impl Iterator<Item = u32> {
    ast.range(id).lines()
}

/// Lines touched by one action: DEL its pre node, INS its post node, UPD
/// and MOV both the pre node and its post partner.
pub fn project_action(action: &EditAction, pre: &Ast, post: &Ast) -> LineSet {
    let mut out = LineSet::new();
    match action.op {
        EditOp::Insert => out.post.extend(rows(post, action.node.id)),
        EditOp::Delete => out.pre.extend(rows(pre, action.node.id)),
        EditOp::Update | EditOp::Move => {
            out.pre.extend(rows(pre, action.node.id));
            if let Some(b) = action.partner {
                out.post.extend(rows(post, b));
            }
        }
    }
    out
}

/// Union of [`project_action`] over the script.
pub fn project_script_to_lines(script: &EditScript, pre: &Ast, post: &Ast) -> LineSet {
    let mut out = LineSet::new();
    for a in script.iter() {
        out.extend(&project_action(a, pre, post));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_method_at;
    use crate::treediff::{derive_edit_script, match_trees, MatchConfig};

    #[test]
    fn examples() {
        assert!(line_diff("a\nb\n", "a\nb\n").is_empty());
        assert_eq!(line_diff("a\nb", "a\nc"), LineSet::from_lines([2], [2]));
        assert_eq!(line_diff("a\nb", "a\nb\n"), LineSet::new());
        assert_eq!(line_diff("", "x\n"), LineSet::from_lines([], [1]));
        assert_eq!(line_diff("a \n", "a\n"), LineSet::from_lines([1], [1]));
    }

    #[test]
    fn serializes_sorted() {
        let s = LineSet::from_lines([3, 1], [7]);
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"pre":[1,3],"post":[7]}"#);
    }

    #[test]
    fn projection_rules() {
        let pre_src = "void f() {\n    if (a) {\n        x(1);\n    }\n}\n";
        let post_src = "void f() {\n    if (a) {\n        x(2);\n    }\n    if (b) {\n        y();\n    }\n}\n";
        let pre = parse_method_at(pre_src, 5).unwrap();
        let post = parse_method_at(post_src, 8).unwrap();
        let m = match_trees(&pre, &post, &MatchConfig::default());
        let s = derive_edit_script(&pre, &post, &m).unwrap();
        assert!(project_script_to_lines(&EditScript::default(), &pre, &post).is_empty());
        let upd = s.iter().find(|a| a.op == EditOp::Update).unwrap();
        assert_eq!(project_action(upd, &pre, &post), LineSet::from_lines([7], [10]));
        let new_if = s
            .iter()
            .find(|a| a.op == EditOp::Insert && a.node.kind == crate::ast::NodeKind::IfStatement)
            .unwrap();
        assert_eq!(project_action(new_if, &pre, &post), LineSet::from_lines([], [12, 13, 14]));
    }

    #[test]
    fn projection_is_monotone_in_the_script() {
        let pre = parse_method_at("void f() {\n  a();\n  b();\n}\n", 1).unwrap();
        let post = parse_method_at("void f() {\n  b();\n  c(1);\n}\n", 1).unwrap();
        let m = match_trees(&pre, &post, &MatchConfig::default());
        let s = derive_edit_script(&pre, &post, &m).unwrap();
        let mut acc = EditScript::default();
        let mut last = LineSet::new();
        for a in s.iter() {
            acc.actions.push(a.clone());
            let now = project_script_to_lines(&acc, &pre, &post);
            assert!(last.is_subset(&now));
            last = now;
        }
    }
}
