//! Exhaustive checks over every ordered tree of at most four nodes built
//! from a two-kind vocabulary.

use microchange::ast::{Ast, AstBuilder, NodeKind, SourceRange};
use microchange::treediff::{
    apply_edit_script, derive_edit_script, match_trees, EditOp, MatchConfig,
};

const KINDS: [NodeKind; 2] = [NodeKind::Block, NodeKind::IfStatement];

/// Shapes as parent-index lists in pre-order (index 0 is the root).
fn shapes(max: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = vec![vec![None]];
    let mut frontier = vec![(vec![None], vec![0usize])];
    for _ in 1..max {
        let mut next = Vec::new();
        for (parents, rightmost_path) in &frontier {
            // A new pre-order node attaches to some node on the rightmost path.
            for (depth, &p) in rightmost_path.iter().enumerate() {
                let mut ps: Vec<Option<usize>> = parents.clone();
                ps.push(Some(p));
                let mut path = rightmost_path[..=depth].to_vec();
                path.push(ps.len() - 1);
                out.push(ps.clone());
                next.push((ps, path));
            }
        }
        frontier = next;
    }
    out
}

fn build(parents: &[Option<usize>], kinds: &[NodeKind]) -> Ast {
    let mut b = AstBuilder::new();
    let mut stack: Vec<usize> = Vec::new();
    for (i, p) in parents.iter().enumerate() {
        while let (Some(&top), Some(p)) = (stack.last(), p) {
            if top == *p {
                break;
            }
            stack.pop();
            b.close();
        }
        b.open(kinds[i], "", SourceRange::default());
        stack.push(i);
    }
    while stack.pop().is_some() {
        b.close();
    }
    b.finish()
}

fn all_trees() -> Vec<Ast> {
    let mut trees = Vec::new();
    for shape in shapes(4) {
        let n = shape.len();
        for mask in 0..(1usize << n) {
            let kinds: Vec<NodeKind> = (0..n).map(|i| KINDS[(mask >> i) & 1]).collect();
            trees.push(build(&shape, &kinds));
        }
    }
    trees
}

/// Brute-force structural signature used as the isomorphism oracle.
fn signature(t: &Ast, id: microchange::ast::NodeId) -> String {
    let inner: Vec<String> = t.children(id).iter().map(|&c| signature(t, c)).collect();
    format!("{}[{}]{{{}}}", t.kind(id), t.label(id), inner.join(","))
}

#[test]
fn tree_enumeration_is_complete() {
    // 1 + 1 + 2 + 5 shapes; 2^n kind assignments each.
    assert_eq!(shapes(4).len(), 9);
    assert_eq!(all_trees().len(), 2 + 4 + 2 * 8 + 5 * 16);
}

#[test]
fn every_small_pair_matches_validly_and_round_trips() {
    let trees = all_trees();
    let cfg = MatchConfig::default();
    for pre in &trees {
        for post in &trees {
            let m = match_trees(pre, post, &cfg);
            m.validate(pre, post).unwrap();
            let script = derive_edit_script(pre, post, &m).unwrap();
            let out = apply_edit_script(pre, &script).unwrap();
            assert_eq!(
                signature(&out, out.root()),
                signature(post, post.root()),
                "round trip failed for {} -> {}",
                pre.dump(),
                post.dump()
            );
            assert!(script.iter().all(|a| a.op != EditOp::Update));

            let pre_kinds: Vec<_> = pre.descendants(pre.root()).map(|n| pre.kind(n)).collect();
            let disjoint = post.descendants(post.root()).all(|n| !pre_kinds.contains(&post.kind(n)));
            if disjoint {
                assert!(m.pairs().all(|(a, b)| a == pre.root() && b == post.root()));
            }
            if signature(pre, pre.root()) == signature(post, post.root()) {
                assert_eq!(m.len(), pre.len());
                assert!(script.is_empty());
            }
        }
    }
}
