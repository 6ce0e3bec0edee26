use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::matcher::lcs;
use super::{MappingStore, Side, TreeDiffError};
use crate::ast::{Ast, NodeId, NodeKind, SourceRange};

/// Index of an action within the full script it was derived in. Filtering a
/// script keeps the original ids.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditOp {
    #[serde(rename = "INS")]
    Insert,
    #[serde(rename = "DEL")]
    Delete,
    #[serde(rename = "UPD")]
    Update,
    #[serde(rename = "MOV")]
    Move,
}

impl EditOp {
    pub fn name(self) -> &'static str {
        match self {
            EditOp::Insert => "INS",
            EditOp::Delete => "DEL",
            EditOp::Update => "UPD",
            EditOp::Move => "MOV",
        }
    }
}

/// A snapshot of a node on one side, as referenced by an action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeRef {
    pub side: Side,
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
    pub range: SourceRange,
}

impl NodeRef {
    fn of(ast: &Ast, side: Side, id: NodeId) -> Self {
        NodeRef {
            side,
            id,
            kind: ast.kind(id),
            label: ast.label(id).to_string(),
            range: ast.range(id),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EditAction {
    pub id: ActionId,
    pub op: EditOp,
    /// Post-side for INS, pre-side otherwise.
    pub node: NodeRef,
    /// Target parent for INS and MOV: the pre node if the post parent is
    /// mapped, else the inserted post node. `None` for a new root.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent: Option<NodeRef>,
    /// Child index in the post-side parent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub new_value: Option<String>,
    /// Post-side partner of an UPD or MOV node.
    #[serde(skip)]
    pub partner: Option<NodeId>,
}

impl EditAction {
    pub fn is(&self, op: EditOp) -> bool {
        self.op == op
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EditScript {
    pub actions: Vec<EditAction>,
}

impl EditScript {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EditAction> {
        self.actions.iter()
    }

    /// Looks an action up by id; scripts are normally sorted by id, but a
    /// reordered one is searched linearly.
    pub fn get(&self, id: ActionId) -> Option<&EditAction> {
        self.actions
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.actions[i])
            .or_else(|| self.actions.iter().find(|a| a.id == id))
    }

    /// The script with the given actions removed; remaining ids are kept.
    pub fn without(&self, removed: &BTreeSet<ActionId>) -> EditScript {
        EditScript {
            actions: self.actions.iter().filter(|a| !removed.contains(&a.id)).cloned().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("edit scripts always serialize")
    }
}

/// Derives the canonical edit script for a mapping: INS in post pre-order,
/// DEL in pre post-order, then UPD/MOV in pre pre-order.
pub fn derive_edit_script(
    pre: &Ast,
    post: &Ast,
    mappings: &MappingStore,
) -> Result<EditScript, TreeDiffError> {
    mappings.validate(pre, post)?;
    let mut actions = Vec::new();
    let parent_ref = |p: NodeId| match mappings.post_partner(p) {
        Some(a) => NodeRef::of(pre, Side::Pre, a),
        None => NodeRef::of(post, Side::Post, p),
    };

    for b in post.preorder() {
        if mappings.is_post_mapped(b) {
            continue;
        }
        actions.push(EditAction {
            id: ActionId(0),
            op: EditOp::Insert,
            node: NodeRef::of(post, Side::Post, b),
            parent: post.parent(b).map(parent_ref),
            position: Some(post.position(b).unwrap_or(0)),
            new_value: None,
            partner: None,
        });
    }

    for a in pre.postorder() {
        if mappings.is_pre_mapped(a) {
            continue;
        }
        actions.push(EditAction {
            id: ActionId(0),
            op: EditOp::Delete,
            node: NodeRef::of(pre, Side::Pre, a),
            parent: None,
            position: None,
            new_value: None,
            partner: None,
        });
    }

    let moved = moved_nodes(pre, post, mappings);
    for a in pre.preorder() {
        let Some(b) = mappings.pre_partner(a) else { continue };
        if pre.label(a) != post.label(b) {
            actions.push(EditAction {
                id: ActionId(0),
                op: EditOp::Update,
                node: NodeRef::of(pre, Side::Pre, a),
                parent: None,
                position: None,
                new_value: Some(post.label(b).to_string()),
                partner: Some(b),
            });
        }
        if moved.contains(&a) {
            actions.push(EditAction {
                id: ActionId(0),
                op: EditOp::Move,
                node: NodeRef::of(pre, Side::Pre, a),
                parent: post.parent(b).map(parent_ref),
                position: Some(post.position(b).unwrap_or(0)),
                new_value: None,
                partner: Some(b),
            });
        }
    }

    for (i, action) in actions.iter_mut().enumerate() {
        action.id = ActionId(i);
    }
    Ok(EditScript { actions })
}

/// Mapped pre nodes that change parent, or fall outside the longest
/// order-preserving run of children under a mapped parent pair.
fn moved_nodes(pre: &Ast, post: &Ast, m: &MappingStore) -> BTreeSet<NodeId> {
    let mut moved = BTreeSet::new();
    for (a, b) in m.pairs() {
        let same_parent = match (pre.parent(a), post.parent(b)) {
            (Some(pa), Some(pb)) => m.contains(pa, pb),
            (None, None) => true,
            _ => false,
        };
        if !same_parent {
            moved.insert(a);
        }
    }
    for (pa, pb) in m.pairs() {
        let staying_pre: Vec<NodeId> = pre
            .children(pa)
            .iter()
            .copied()
            .filter(|&c| m.pre_partner(c).is_some_and(|d| post.parent(d) == Some(pb)))
            .collect();
        if staying_pre.len() < 2 {
            continue;
        }
        let staying_post: Vec<NodeId> = post
            .children(pb)
            .iter()
            .copied()
            .filter(|&d| m.post_partner(d).is_some_and(|c| pre.parent(c) == Some(pa)))
            .collect();
        let kept: BTreeSet<NodeId> = lcs(&staying_pre, &staying_post, |c, d| m.contains(c, d))
            .into_iter()
            .map(|(c, _)| c)
            .collect();
        moved.extend(staying_pre.into_iter().filter(|c| !kept.contains(c)));
    }
    moved
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Pruning {
    Kept,
    OnlyInsertions,
    OnlyDeletions,
}

impl Pruning {
    pub fn is_kept(self) -> bool {
        self == Pruning::Kept
    }
}

/// Discards scripts made only of insertions or only of deletions. Empty
/// scripts are kept.
pub fn prune_pure_scripts(script: &EditScript) -> Pruning {
    if script.is_empty() {
        Pruning::Kept
    } else if script.iter().all(|a| a.op == EditOp::Insert) {
        Pruning::OnlyInsertions
    } else if script.iter().all(|a| a.op == EditOp::Delete) {
        Pruning::OnlyDeletions
    } else {
        Pruning::Kept
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_method;
    use crate::treediff::{match_trees, MatchConfig};

    fn diff(a: &str, b: &str) -> (Ast, Ast, EditScript) {
        let pre = parse_method(a).unwrap();
        let post = parse_method(b).unwrap();
        let m = match_trees(&pre, &post, &MatchConfig::default());
        let s = derive_edit_script(&pre, &post, &m).unwrap();
        (pre, post, s)
    }

    #[test]
    fn identity_gives_empty_script() {
        let (_, _, s) = diff("void f(){ if (a) { b(); } }", "void f(){ if (a) { b(); } }");
        assert!(s.is_empty());
    }

    #[test]
    fn single_leaf_change_is_one_update() {
        let (_, _, s) = diff("int f(){ return x + 1; }", "int f(){ return x + 2; }");
        assert_eq!(s.len(), 1);
        let a = &s.actions[0];
        assert_eq!(a.op, EditOp::Update);
        assert_eq!(a.node.label, "1");
        assert_eq!(a.new_value.as_deref(), Some("2"));
    }

    #[test]
    fn zuul_conjunct_is_inserted() {
        let (_, _, s) = diff(
            "void f(){ if (server != null) { use(server); } }",
            "void f(){ if (server != null && server != DiscoveryResult.EMPTY) { use(server); } }",
        );
        assert!(s.iter().all(|a| a.op != EditOp::Delete));
        let and = s
            .iter()
            .find(|a| a.op == EditOp::Insert && a.node.label == "&&")
            .expect("&& inserted");
        let parent = and.parent.as_ref().unwrap();
        assert_eq!(parent.kind, NodeKind::ConditionExpr);
        assert!(s.iter().any(|a| a.op == EditOp::Insert && a.node.label == "DiscoveryResult.EMPTY"));
    }

    #[test]
    fn invalid_mapping_is_rejected() {
        let pre = parse_method("void f(){ x(); }").unwrap();
        let m = MappingStore::from_pairs([(NodeId(0), NodeId(1))]);
        assert!(matches!(
            derive_edit_script(&pre, &pre, &m),
            Err(TreeDiffError::InvalidMapping(_))
        ));
    }

    #[test]
    fn reordered_statements_move() {
        let (_, _, s) = diff(
            "void f(){ alpha(1); beta(2); gamma(3); }",
            "void f(){ gamma(3); alpha(1); beta(2); }",
        );
        let moves: Vec<_> = s.iter().filter(|a| a.op == EditOp::Move).collect();
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].position, Some(0));
        assert_eq!(s.len(), 1);
    }

    fn action(op: EditOp) -> EditAction {
        EditAction {
            id: ActionId(0),
            op,
            node: NodeRef {
                side: Side::Pre,
                id: NodeId(0),
                kind: NodeKind::Block,
                label: String::new(),
                range: SourceRange::default(),
            },
            parent: None,
            position: None,
            new_value: None,
            partner: None,
        }
    }

    #[test]
    fn pruning_rules() {
        let s = |ops: &[EditOp]| EditScript { actions: ops.iter().map(|&o| action(o)).collect() };
        assert_eq!(prune_pure_scripts(&s(&[EditOp::Insert, EditOp::Insert])), Pruning::OnlyInsertions);
        assert_eq!(prune_pure_scripts(&s(&[EditOp::Delete])), Pruning::OnlyDeletions);
        assert_eq!(prune_pure_scripts(&s(&[EditOp::Insert, EditOp::Delete])), Pruning::Kept);
        assert_eq!(prune_pure_scripts(&s(&[])), Pruning::Kept);
    }

    #[test]
    fn json_shape() {
        let (_, _, s) = diff("int f(){ return 1; }", "int f(){ return 2; }");
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        let a = &v["actions"][0];
        assert_eq!(a["op"], "UPD");
        assert_eq!(a["node"]["side"], "pre");
        assert_eq!(a["node"]["kind"], "NumberLiteral");
        assert_eq!(a["new_value"], "2");
        assert!(a.get("parent").is_none());
        let raw = s.to_json();
        let at = |k: &str| raw.find(&format!("\"{k}\"")).unwrap();
        assert!(at("op") < at("node") && at("node") < at("new_value"));
        assert!(at("side") < at("kind") && at("kind") < at("label") && at("label") < at("range"));
    }
}
