//! Tree differencing: node matching and INS/DEL/UPD/MOV edit scripts.

mod apply;
mod matcher;
mod script;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{Ast, NodeId};

pub use apply::apply_edit_script;
pub use matcher::{match_trees, match_trees_with_stats, MatchStats};
pub use script::{
    derive_edit_script, prune_pure_scripts, ActionId, EditAction, EditOp, EditScript, NodeRef,
    Pruning,
};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Smallest subtree height considered by the top-down phase.
    pub min_height: usize,
    /// Minimum dice similarity for container matches.
    pub dice_threshold: f64,
    /// Largest number of unmatched descendants the recovery pass will handle.
    pub max_recovery_size: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig { min_height: 2, dice_threshold: 0.5, max_recovery_size: 100 }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Pre,
    Post,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeDiffError {
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
    #[error("malformed edit script: {0}")]
    MalformedScript(String),
}

/// One-to-one correspondence between pre-change and post-change nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MappingStore {
    pre_to_post: Vec<Option<NodeId>>,
    post_to_pre: Vec<Option<NodeId>>,
    len: usize,
    conflict: Option<(NodeId, NodeId)>,
}

impl MappingStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(pre_len: usize, post_len: usize) -> Self {
        MappingStore {
            pre_to_post: vec![None; pre_len],
            post_to_pre: vec![None; post_len],
            len: 0,
            conflict: None,
        }
    }

    /// Builds a store from arbitrary pairs. Pairs that break injectivity are
    /// remembered and reported by [`MappingStore::validate`].
    pub fn from_pairs(pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let mut store = MappingStore::new();
        for (a, b) in pairs {
            if store.pre_partner(a).is_some() || store.post_partner(b).is_some() {
                store.conflict.get_or_insert((a, b));
            } else {
                store.link(a, b);
            }
        }
        store
    }

    /// Maps `a` (pre) to `b` (post). Both must be unmapped.
    pub fn link(&mut self, a: NodeId, b: NodeId) {
        debug_assert!(self.pre_partner(a).is_none() && self.post_partner(b).is_none());
        if self.pre_to_post.len() <= a.0 {
            self.pre_to_post.resize(a.0 + 1, None);
        }
        if self.post_to_pre.len() <= b.0 {
            self.post_to_pre.resize(b.0 + 1, None);
        }
        self.pre_to_post[a.0] = Some(b);
        self.post_to_pre[b.0] = Some(a);
        self.len += 1;
    }

    pub fn pre_partner(&self, a: NodeId) -> Option<NodeId> {
        self.pre_to_post.get(a.0).copied().flatten()
    }

    pub fn post_partner(&self, b: NodeId) -> Option<NodeId> {
        self.post_to_pre.get(b.0).copied().flatten()
    }

    pub fn is_pre_mapped(&self, a: NodeId) -> bool {
        self.pre_partner(a).is_some()
    }

    pub fn is_post_mapped(&self, b: NodeId) -> bool {
        self.post_partner(b).is_some()
    }

    pub fn contains(&self, a: NodeId, b: NodeId) -> bool {
        self.pre_partner(a) == Some(b)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Pairs in ascending pre-node order.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.pre_to_post
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.map(|b| (NodeId(i), b)))
    }

    /// Checks injectivity, bounds and kind compatibility against the trees.
    pub fn validate(&self, pre: &Ast, post: &Ast) -> Result<(), TreeDiffError> {
        if let Some((a, b)) = self.conflict {
            return Err(TreeDiffError::InvalidMapping(format!(
                "pair ({a}, {b}) maps a node twice"
            )));
        }
        for (a, b) in self.pairs() {
            let (Some(na), Some(nb)) = (pre.get(a), post.get(b)) else {
                return Err(TreeDiffError::InvalidMapping(format!(
                    "pair ({a}, {b}) references a missing node"
                )));
            };
            if na.kind != nb.kind {
                return Err(TreeDiffError::InvalidMapping(format!(
                    "pair ({a}, {b}) relates {} to {}",
                    na.kind, nb.kind
                )));
            }
        }
        Ok(())
    }
}

/// Dice similarity of two containers: shared mapped descendants over the
/// total number of descendants.
pub fn dice(pre: &Ast, post: &Ast, m: &MappingStore, a: NodeId, b: NodeId) -> f64 {
    let da = pre.size(a) - 1;
    let db = post.size(b) - 1;
    if da + db == 0 {
        return 0.0;
    }
    let common = pre
        .descendants(a)
        .filter(|&d| m.pre_partner(d).is_some_and(|p| post.is_descendant(p, b)))
        .count();
    2.0 * common as f64 / (da + db) as f64
}
