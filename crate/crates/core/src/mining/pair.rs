//! Analysis of one changed method pair.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ast::{parse_method_at, Ast, AstError};
use crate::catalog::{detect_micro_changes, MicroChangeInstance};
use crate::metrics::{conditional_related_lines, CoverageCounts};
use crate::refactorings::{refactoring_lines, rename_covered, RefactoringRecord};
use crate::textdiff::{line_diff, project_action, project_script_to_lines, LineSet};
use crate::treediff::{
    derive_edit_script, match_trees, prune_pure_scripts, ActionId, EditScript, MappingStore, MatchConfig, Pruning,
};

use super::MethodText;

/// A parsed and differenced method pair, before refactorings are applied.
#[derive(Clone, Debug)]
pub struct DiffedPair {
    pub pre: Ast,
    pub post: Ast,
    pub mappings: MappingStore,
    pub script: EditScript,
    pub pruning: Pruning,
    diff_text: LineSet,
}

/// Changed-line sets of one method pair, in file coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodLines {
    pub diff_text: LineSet,
    pub diff_tree: LineSet,
    pub crc: LineSet,
    pub mc: LineSet,
    pub ref_rename: LineSet,
    pub ref_nonrename: LineSet,
}

impl MethodLines {
    pub fn counts(&self) -> CoverageCounts {
        CoverageCounts::new(&self.mc, &self.ref_rename.union(&self.ref_nonrename), &self.crc)
    }
}

#[derive(Clone, Debug)]
pub struct PairAnalysis {
    pub diffed: DiffedPair,
    /// UPD actions explained by renames; left out of detection.
    pub covered: BTreeSet<ActionId>,
    pub instances: Vec<MicroChangeInstance>,
    pub lines: MethodLines,
}

/// Parses both versions at their file lines and derives the edit script.
pub fn diff_pair(pre: &MethodText, post: &MethodText, config: &MatchConfig) -> Result<DiffedPair, AstError> {
    let pre_ast = parse_method_at(&pre.text, pre.start_line)?;
    let post_ast = parse_method_at(&post.text, post.start_line)?;
    let mappings = match_trees(&pre_ast, &post_ast, config);
    let script = derive_edit_script(&pre_ast, &post_ast, &mappings).expect("matcher output is a valid mapping");
    let pruning = prune_pure_scripts(&script);
    let diff_text = line_diff(&pre.text, &post.text).shifted(pre.start_line - 1, post.start_line - 1);
    Ok(DiffedPair { pre: pre_ast, post: post_ast, mappings, script, pruning, diff_text })
}

fn clip(lines: &LineSet, pre: &Ast, post: &Ast) -> LineSet {
    let ((a0, a1), (b0, b1)) = (pre.line_span(), post.line_span());
    LineSet {
        pre: lines.pre.range(a0..=a1).copied().collect(),
        post: lines.post.range(b0..=b1).copied().collect(),
    }
}

impl DiffedPair {
    /// Removes rename-covered updates, detects micro-changes in the rest and
    /// computes the line sets. `records` belong to this pair's commit and
    /// file; their locations are restricted to `file` when given and clipped
    /// to the method.
    pub fn finish(self, records: &[&RefactoringRecord], file: Option<&str>) -> PairAnalysis {
        let covered = rename_covered(&self.script, records);
        let kept = EditScript {
            actions: self.script.iter().filter(|a| !covered.contains(&a.id)).cloned().collect(),
        };
        let instances = detect_micro_changes(&kept, &self.mappings, &self.pre, &self.post);
        let project = |ids: &mut dyn Iterator<Item = ActionId>| {
            let mut out = LineSet::new();
            for id in ids {
                if let Some(a) = self.script.get(id) {
                    out.extend(&project_action(a, &self.pre, &self.post));
                }
            }
            out
        };
        let mc = project(&mut instances.iter().flat_map(|i| i.actions.iter().copied()));
        let covered_lines = project(&mut covered.iter().copied());
        let refs = refactoring_lines(records.iter().copied(), file, &covered_lines);
        let diff_tree = project_script_to_lines(&self.script, &self.pre, &self.post);
        let crc = conditional_related_lines(&self.pre, &self.post, &self.diff_text, &diff_tree);
        let lines = MethodLines {
            diff_text: self.diff_text.clone(),
            diff_tree,
            crc,
            mc,
            ref_rename: clip(&refs.ref_rename, &self.pre, &self.post),
            ref_nonrename: clip(&refs.ref_nonrename, &self.pre, &self.post),
        };
        PairAnalysis { diffed: self, covered, instances, lines }
    }
}
