//! Replays an edit script on the pre tree. Used as a soundness oracle.
//!
//! Application is phase-based so that it does not depend on the order of
//! actions within the script: labels are updated, moved nodes detached,
//! inserted nodes created, deleted nodes dropped, and finally every
//! inserted or moved node is attached in (parent, position) order.

use std::collections::{BTreeMap, BTreeSet};

use super::{EditOp, EditScript, Side, TreeDiffError};
use crate::ast::{Ast, AstBuilder, NodeKind, SourceRange};

type Key = (Side, usize);

struct Slot {
    kind: NodeKind,
    label: String,
    parent: Option<Key>,
    children: Vec<Key>,
}

fn malformed(msg: String) -> TreeDiffError {
    TreeDiffError::MalformedScript(msg)
}

/// Applies `script` to `pre`, returning the resulting tree. Source ranges
/// are not reconstructed.
pub fn apply_edit_script(pre: &Ast, script: &EditScript) -> Result<Ast, TreeDiffError> {
    let mut slots: BTreeMap<Key, Slot> = BTreeMap::new();
    for n in pre.nodes() {
        slots.insert(
            (Side::Pre, n.id.0),
            Slot {
                kind: n.kind,
                label: n.label.clone(),
                parent: n.parent.map(|p| (Side::Pre, p.0)),
                children: n.children.iter().map(|c| (Side::Pre, c.0)).collect(),
            },
        );
    }
    let pre_key = |side: Side, id: usize, what: &str| -> Result<Key, TreeDiffError> {
        if side != Side::Pre || id >= pre.len() {
            return Err(malformed(format!("{what} must reference an existing pre node, got {side:?} {id}")));
        }
        Ok((side, id))
    };

    for a in script.iter().filter(|a| a.op == EditOp::Update) {
        let key = pre_key(a.node.side, a.node.id.0, "UPD")?;
        let value = a.new_value.clone().ok_or_else(|| malformed(format!("UPD {} lacks a value", a.id)))?;
        slots.get_mut(&key).unwrap().label = value;
    }

    let mut attach: Vec<(Option<Key>, usize, Key)> = Vec::new();
    for a in script.iter().filter(|a| a.op == EditOp::Move) {
        let key = pre_key(a.node.side, a.node.id.0, "MOV")?;
        detach(&mut slots, key);
        let parent = a.parent.as_ref().map(|p| (p.side, p.id.0));
        attach.push((parent, a.position.unwrap_or(0), key));
    }

    for a in script.iter().filter(|a| a.op == EditOp::Insert) {
        if a.node.side != Side::Post {
            return Err(malformed(format!("INS {} must reference a post node", a.id)));
        }
        let key = (Side::Post, a.node.id.0);
        if slots.contains_key(&key) {
            return Err(malformed(format!("node inserted twice by INS {}", a.id)));
        }
        slots.insert(
            key,
            Slot { kind: a.node.kind, label: a.node.label.clone(), parent: None, children: Vec::new() },
        );
        let parent = a.parent.as_ref().map(|p| (p.side, p.id.0));
        attach.push((parent, a.position.unwrap_or(0), key));
    }

    let deleted: BTreeSet<Key> = script
        .iter()
        .filter(|a| a.op == EditOp::Delete)
        .map(|a| pre_key(a.node.side, a.node.id.0, "DEL"))
        .collect::<Result<_, _>>()?;
    for &key in &deleted {
        if let Some(&c) = slots[&key].children.iter().find(|c| !deleted.contains(c)) {
            return Err(malformed(format!("deleted node {key:?} still has child {c:?}")));
        }
    }
    for key in &deleted {
        if let Some(p) = slots[key].parent {
            if let Some(ps) = slots.get_mut(&p) {
                ps.children.retain(|c| c != key);
            }
        }
    }
    for key in &deleted {
        slots.remove(key);
    }

    attach.sort_by_key(|&(parent, pos, _)| (parent, pos));
    for (parent, pos, key) in attach {
        let Some(parent) = parent else { continue };
        if parent == key {
            return Err(malformed(format!("{key:?} attached to itself")));
        }
        let ps = slots
            .get_mut(&parent)
            .ok_or_else(|| malformed(format!("missing parent {parent:?}")))?;
        if pos > ps.children.len() {
            return Err(malformed(format!(
                "position {pos} out of bounds under {parent:?} ({} children)",
                ps.children.len()
            )));
        }
        ps.children.insert(pos, key);
        slots.get_mut(&key).unwrap().parent = Some(parent);
    }

    let roots: Vec<Key> = slots.iter().filter(|(_, s)| s.parent.is_none()).map(|(k, _)| *k).collect();
    let root = match roots.as_slice() {
        [r] => *r,
        [] => return Err(malformed("script leaves no root".into())),
        _ => return Err(malformed(format!("script leaves {} roots", roots.len()))),
    };
    let mut builder = AstBuilder::new();
    let mut visited = 0usize;
    let mut stack: Vec<(Key, bool)> = vec![(root, false)];
    while let Some((key, closing)) = stack.pop() {
        if closing {
            builder.close();
            continue;
        }
        visited += 1;
        if visited > slots.len() {
            return Err(malformed("script creates a cycle".into()));
        }
        let slot = &slots[&key];
        builder.open(slot.kind, slot.label.clone(), SourceRange::default());
        stack.push((key, true));
        for &c in slot.children.iter().rev() {
            stack.push((c, false));
        }
    }
    if visited != slots.len() {
        return Err(malformed(format!("{} nodes left detached", slots.len() - visited)));
    }
    Ok(builder.finish())
}

fn detach(slots: &mut BTreeMap<Key, Slot>, key: Key) {
    if let Some(p) = slots.get_mut(&key).and_then(|s| s.parent.take()) {
        slots.get_mut(&p).unwrap().children.retain(|&c| c != key);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_method;
    use crate::treediff::{derive_edit_script, match_trees, MatchConfig};

    fn round_trip(a: &str, b: &str) {
        let pre = parse_method(a).unwrap();
        let post = parse_method(b).unwrap();
        let m = match_trees(&pre, &post, &MatchConfig::default());
        let s = derive_edit_script(&pre, &post, &m).unwrap();
        let out = apply_edit_script(&pre, &s).unwrap();
        assert!(out.isomorphic_to(&post), "{}\nvs\n{}", out.dump(), post.dump());
    }

    #[test]
    fn empty_script_is_identity() {
        let pre = parse_method("void f(){ if (a) b(); }").unwrap();
        let out = apply_edit_script(&pre, &EditScript::default()).unwrap();
        assert!(out.isomorphic_to(&pre));
    }

    #[test]
    fn round_trips() {
        round_trip("int f(){ return 1; }", "int f(){ return 2; }");
        round_trip(
            "void f(){ if (server != null) { use(server); } }",
            "void f(){ if (server != null && server != DiscoveryResult.EMPTY) { use(server); } }",
        );
        round_trip("void f(){ if (c) foo(); }", "void f(){ if (c) { foo(); } }");
        round_trip("void f(){ a(); b(); c(); }", "void f(){ c(); a(); b(); }");
        round_trip("void f(){ if (x) { a(); } else { b(); } }", "void f(){ if (!x) { b(); } else { a(); } }");
        round_trip("void f(){ x(); }", "int g(int q){ return q > 0 ? 1 : 2; }");
        round_trip("void f(){ if (a) { if (b) { go(); } } }", "void f(){ if (a && b) { go(); } }");
    }

    #[test]
    fn bad_position_is_malformed() {
        let pre = parse_method("int f(){ return 1; }").unwrap();
        let post = parse_method("int f(){ return 1; x(); }").unwrap();
        let m = match_trees(&pre, &post, &MatchConfig::default());
        let mut s = derive_edit_script(&pre, &post, &m).unwrap();
        let ins = s.actions.iter_mut().find(|a| a.op == EditOp::Insert).unwrap();
        ins.position = Some(9);
        assert!(matches!(apply_edit_script(&pre, &s), Err(TreeDiffError::MalformedScript(_))));
    }
}
