//! GumTree-style matching: greedy top-down isomorphic subtrees, then a
//! bottom-up container pass with a size-bounded recovery step, then a
//! pass that pairs leftover deleted and inserted regions sharing most of
//! their leaves.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use super::{dice, MappingStore, MatchConfig};
use crate::ast::{Ast, NodeId, NodeKind};

/// Computes a mapping between `pre` and `post`.
pub fn match_trees(pre: &Ast, post: &Ast, config: &MatchConfig) -> MappingStore {
    match_trees_with_stats(pre, post, config).0
}

/// Number of pairs contributed by each matching phase.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchStats {
    /// Pairs from isomorphic subtrees.
    pub top_down: usize,
    /// Container pairs accepted on dice similarity, roots included.
    pub containers: usize,
    /// Pairs found by recovery below matched containers.
    pub recovered: usize,
    /// Region roots paired by the coalescing pass.
    pub coalesced: usize,
}

/// Like [`match_trees`], also reporting per-phase counts.
pub fn match_trees_with_stats(
    pre: &Ast,
    post: &Ast,
    config: &MatchConfig,
) -> (MappingStore, MatchStats) {
    let mut m = Matcher {
        pre,
        post,
        cfg: config,
        map: MappingStore::with_capacity(pre.len(), post.len()),
        stats: MatchStats::default(),
    };
    if pre.is_empty() || post.is_empty() {
        return (m.map, m.stats);
    }
    m.top_down();
    m.stats.top_down = m.map.len();
    m.bottom_up();
    m.coalesce_regions();
    m.stats.recovered = m.map.len() - m.stats.top_down - m.stats.containers - m.stats.coalesced;
    (m.map, m.stats)
}

struct Matcher<'a> {
    pre: &'a Ast,
    post: &'a Ast,
    cfg: &'a MatchConfig,
    map: MappingStore,
    stats: MatchStats,
}

struct HeightQueue<'a> {
    ast: &'a Ast,
    min_height: usize,
    heap: BinaryHeap<(usize, Reverse<NodeId>)>,
}

impl<'a> HeightQueue<'a> {
    fn new(ast: &'a Ast, min_height: usize) -> Self {
        let mut q = HeightQueue { ast, min_height, heap: BinaryHeap::new() };
        q.push(ast.root());
        q
    }

    fn push(&mut self, id: NodeId) {
        let h = self.ast.height(id);
        if h >= self.min_height {
            self.heap.push((h, Reverse(id)));
        }
    }

    fn open(&mut self, id: NodeId) {
        for &c in self.ast.children(id) {
            self.push(c);
        }
    }

    fn peek_height(&self) -> Option<usize> {
        self.heap.peek().map(|(h, _)| *h)
    }

    /// All queued nodes of the current maximum height, in id order.
    fn pop_tallest(&mut self) -> Vec<NodeId> {
        let Some(h) = self.peek_height() else { return Vec::new() };
        let mut out = Vec::new();
        while self.peek_height() == Some(h) {
            out.push(self.heap.pop().unwrap().1 .0);
        }
        out
    }
}

impl<'a> Matcher<'a> {
    fn subtree_unmapped(&self, a: NodeId, b: NodeId) -> bool {
        self.pre.subtree(a).all(|x| !self.map.is_pre_mapped(x))
            && self.post.subtree(b).all(|y| !self.map.is_post_mapped(y))
    }

    fn link_isomorphic(&mut self, a: NodeId, b: NodeId) {
        let pairs: Vec<_> = self.pre.subtree(a).zip(self.post.subtree(b)).collect();
        for (x, y) in pairs {
            if !self.map.is_pre_mapped(x) && !self.map.is_post_mapped(y) {
                self.map.link(x, y);
            }
        }
    }

    fn parent_dice(&self, a: NodeId, b: NodeId) -> f64 {
        match (self.pre.parent(a), self.post.parent(b)) {
            (Some(pa), Some(pb)) => dice(self.pre, self.post, &self.map, pa, pb),
            _ => 0.0,
        }
    }

    fn top_down(&mut self) {
        let mut q1 = HeightQueue::new(self.pre, self.cfg.min_height.max(1));
        let mut q2 = HeightQueue::new(self.post, self.cfg.min_height.max(1));
        let mut ambiguous: Vec<(NodeId, NodeId)> = Vec::new();
        while let (Some(h1), Some(h2)) = (q1.peek_height(), q2.peek_height()) {
            if h1 > h2 {
                for t in q1.pop_tallest() {
                    q1.open(t);
                }
                continue;
            }
            if h2 > h1 {
                for t in q2.pop_tallest() {
                    q2.open(t);
                }
                continue;
            }
            let level1 = q1.pop_tallest();
            let level2 = q2.pop_tallest();
            let mut by_hash: HashMap<u64, Vec<NodeId>> = HashMap::new();
            for &t2 in &level2 {
                by_hash.entry(self.post.subtree_hash(t2)).or_default().push(t2);
            }
            let mut pairs = Vec::new();
            for &t1 in &level1 {
                if let Some(cands) = by_hash.get(&self.pre.subtree_hash(t1)) {
                    for &t2 in cands {
                        if self.pre.isomorphic(t1, self.post, t2) {
                            pairs.push((t1, t2));
                        }
                    }
                }
            }
            let mut count1: HashMap<NodeId, usize> = HashMap::new();
            let mut count2: HashMap<NodeId, usize> = HashMap::new();
            for &(t1, t2) in &pairs {
                *count1.entry(t1).or_default() += 1;
                *count2.entry(t2).or_default() += 1;
            }
            for &(t1, t2) in &pairs {
                if count1[&t1] == 1 && count2[&t2] == 1 {
                    self.link_isomorphic(t1, t2);
                } else {
                    ambiguous.push((t1, t2));
                }
            }
            for t1 in level1 {
                if !count1.contains_key(&t1) {
                    q1.open(t1);
                }
            }
            for t2 in level2 {
                if !count2.contains_key(&t2) {
                    q2.open(t2);
                }
            }
        }
        let mut scored: Vec<(f64, NodeId, NodeId)> = ambiguous
            .into_iter()
            .map(|(a, b)| (self.parent_dice(a, b), a, b))
            .collect();
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        for (_, a, b) in scored {
            if self.subtree_unmapped(a, b) {
                self.link_isomorphic(a, b);
            }
        }
    }

    /// Container matching runs to completion before any recovery, so the
    /// threshold alone decides which containers pair up.
    fn bottom_up(&mut self) {
        let (pre, post) = (self.pre, self.post);
        let mut containers = Vec::new();
        for t1 in pre.postorder() {
            if self.map.is_pre_mapped(t1) {
                continue;
            }
            if t1 == pre.root() {
                let r2 = post.root();
                if !self.map.is_post_mapped(r2) && pre.kind(t1) == post.kind(r2) {
                    self.map.link(t1, r2);
                    containers.push((t1, r2));
                }
                continue;
            }
            if pre.is_leaf(t1) {
                continue;
            }
            let kind = pre.kind(t1);
            let mut candidates = BTreeSet::new();
            for d in pre.descendants(t1) {
                let Some(p) = self.map.pre_partner(d) else { continue };
                for anc in post.ancestors(p) {
                    if anc != post.root()
                        && post.kind(anc) == kind
                        && !self.map.is_post_mapped(anc)
                    {
                        candidates.insert(anc);
                    }
                }
            }
            let mut best: Option<(f64, NodeId)> = None;
            for c in candidates {
                let sim = dice(pre, post, &self.map, t1, c);
                if best.is_none_or(|(s, _)| sim > s) {
                    best = Some((sim, c));
                }
            }
            if let Some((sim, t2)) = best {
                if sim > 0.0 && sim >= self.cfg.dice_threshold && !self.yields_to_ancestor(t1, t2) {
                    self.map.link(t1, t2);
                    containers.push((t1, t2));
                }
            }
        }
        self.stats.containers = containers.len();
        for (a, b) in containers {
            self.recover(a, b);
        }
    }

    /// True if an unmatched ancestor of `t1` of the same kind is a better
    /// fit for `t2`: either more similar, or qualifying and sitting under
    /// the pre counterpart of `t2`'s parent. Keeps a nested block or if from
    /// taking the enclosing one when its wrapper statement was removed.
    fn yields_to_ancestor(&self, t1: NodeId, t2: NodeId) -> bool {
        let (pre, post) = (self.pre, self.post);
        let own = dice(pre, post, &self.map, t1, t2);
        let better = pre.ancestors(t1).any(|t| {
            pre.kind(t) == post.kind(t2)
                && !self.map.is_pre_mapped(t)
                && dice(pre, post, &self.map, t, t2) > own
        });
        if better {
            return true;
        }
        let Some(p2) = post.parent(t2) else { return false };
        let expected = if p2 == post.root() {
            Some(pre.root()).filter(|&r| pre.kind(r) == post.kind(p2))
        } else {
            self.map.post_partner(p2)
        };
        let Some(p1) = expected else { return false };
        if pre.parent(t1) == Some(p1) {
            return false;
        }
        pre.ancestors(t1)
            .take_while(|&t| t != p1)
            .filter(|&t| pre.parent(t) == Some(p1) && pre.kind(t) == post.kind(t2))
            .any(|t| {
                !self.map.is_pre_mapped(t)
                    && dice(pre, post, &self.map, t, t2) >= self.cfg.dice_threshold
            })
    }

    /// Matches leftover descendants of a freshly matched container pair.
    fn recover(&mut self, a: NodeId, b: NodeId) {
        let free_a = self.pre.descendants(a).filter(|&x| !self.map.is_pre_mapped(x)).count();
        let free_b = self.post.descendants(b).filter(|&y| !self.map.is_post_mapped(y)).count();
        if free_a == 0 || free_b == 0 || free_a.max(free_b) > self.cfg.max_recovery_size {
            return;
        }
        self.recover_children(a, b);
        self.last_chance(a, b);
    }

    fn free_children(&self, a: NodeId, b: NodeId) -> (Vec<NodeId>, Vec<NodeId>) {
        let c1 = self
            .pre
            .children(a)
            .iter()
            .copied()
            .filter(|&x| !self.map.is_pre_mapped(x))
            .collect();
        let c2 = self
            .post
            .children(b)
            .iter()
            .copied()
            .filter(|&y| !self.map.is_post_mapped(y))
            .collect();
        (c1, c2)
    }

    fn recover_children(&mut self, a: NodeId, b: NodeId) {
        let (pre, post) = (self.pre, self.post);
        let (c1, c2) = self.free_children(a, b);
        for (x, y) in lcs(&c1, &c2, |x, y| pre.isomorphic(x, post, y)) {
            self.link_isomorphic(x, y);
        }
        let (c1, c2) = self.free_children(a, b);
        for (x, y) in lcs(&c1, &c2, |x, y| pre.kind(x) == post.kind(y)) {
            self.map.link(x, y);
            self.recover_children(x, y);
        }
        let (c1, c2) = self.free_children(a, b);
        let mut counts: HashMap<NodeKind, (usize, usize)> = HashMap::new();
        for &x in &c1 {
            counts.entry(pre.kind(x)).or_default().0 += 1;
        }
        for &y in &c2 {
            counts.entry(post.kind(y)).or_default().1 += 1;
        }
        for &x in &c1 {
            if counts[&pre.kind(x)] != (1, 1) {
                continue;
            }
            let y = *c2.iter().find(|&&y| post.kind(y) == pre.kind(x)).unwrap();
            self.map.link(x, y);
            self.recover_children(x, y);
        }
    }

    /// Aligns the remaining free descendants by kind and label.
    fn last_chance(&mut self, a: NodeId, b: NodeId) {
        let (pre, post) = (self.pre, self.post);
        let s1: Vec<NodeId> = subtree_postorder(pre, a)
            .into_iter()
            .filter(|&x| x != a && !self.map.is_pre_mapped(x))
            .collect();
        let s2: Vec<NodeId> = subtree_postorder(post, b)
            .into_iter()
            .filter(|&y| y != b && !self.map.is_post_mapped(y))
            .collect();
        for (x, y) in lcs(&s1, &s2, |x, y| {
            pre.kind(x) == post.kind(y) && pre.label(x) == post.label(y)
        }) {
            self.map.link(x, y);
        }
    }

    /// Pairs maximal deleted and inserted regions with the same root kind
    /// whose leaves mostly coincide, so they surface as MOV/UPD.
    fn coalesce_regions(&mut self) {
        let (pre, post) = (self.pre, self.post);
        let region_roots_pre: Vec<NodeId> = pre
            .preorder()
            .filter(|&x| {
                !pre.is_leaf(x)
                    && !self.map.is_pre_mapped(x)
                    && pre.parent(x).is_some_and(|p| self.map.is_pre_mapped(p))
            })
            .collect();
        let region_roots_post: Vec<NodeId> = post
            .preorder()
            .filter(|&y| {
                !post.is_leaf(y)
                    && !self.map.is_post_mapped(y)
                    && post.parent(y).is_some_and(|p| self.map.is_post_mapped(p))
            })
            .collect();
        if region_roots_pre.is_empty() || region_roots_post.is_empty() {
            return;
        }
        let leaves_post: Vec<HashMap<(NodeKind, &str), usize>> =
            region_roots_post.iter().map(|&y| leaf_bag(post, y)).collect();
        for a in region_roots_pre {
            if self.map.is_pre_mapped(a) {
                continue;
            }
            let bag_a = leaf_bag(pre, a);
            let total_a: usize = bag_a.values().sum();
            let mut best: Option<(f64, NodeId)> = None;
            for (i, &b) in region_roots_post.iter().enumerate() {
                if self.map.is_post_mapped(b) || post.kind(b) != pre.kind(a) {
                    continue;
                }
                let bag_b = &leaves_post[i];
                let total_b: usize = bag_b.values().sum();
                let shared: usize = bag_a
                    .iter()
                    .map(|(k, &n)| n.min(bag_b.get(k).copied().unwrap_or(0)))
                    .sum();
                let sim = 2.0 * shared as f64 / (total_a + total_b).max(1) as f64;
                if best.is_none_or(|(s, _)| sim > s) {
                    best = Some((sim, b));
                }
            }
            if let Some((sim, b)) = best {
                if sim > 0.0 && sim >= self.cfg.dice_threshold {
                    self.map.link(a, b);
                    self.stats.coalesced += 1;
                    self.recover(a, b);
                }
            }
        }
    }
}

fn leaf_bag(ast: &Ast, root: NodeId) -> HashMap<(NodeKind, &str), usize> {
    let mut bag = HashMap::new();
    for x in ast.subtree(root).filter(|&x| ast.is_leaf(x)) {
        *bag.entry((ast.kind(x), ast.label(x))).or_default() += 1;
    }
    bag
}

fn subtree_postorder(ast: &Ast, root: NodeId) -> Vec<NodeId> {
    let mut out = Vec::with_capacity(ast.size(root));
    let mut stack = vec![(root, false)];
    while let Some((id, expanded)) = stack.pop() {
        if expanded {
            out.push(id);
        } else {
            stack.push((id, true));
            for &c in ast.children(id).iter().rev() {
                stack.push((c, false));
            }
        }
    }
    out
}

/// Longest common subsequence under `eq`, returned as index-aligned pairs.
/// Ties prefer the earliest elements of `a`.
pub(crate) fn lcs<T: Copy>(a: &[T], b: &[T], eq: impl Fn(T, T) -> bool) -> Vec<(T, T)> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let mut table = vec![0u32; (n + 1) * (m + 1)];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[at(i, j)] = if eq(a[i], b[j]) {
                table[at(i + 1, j + 1)] + 1
            } else {
                table[at(i + 1, j)].max(table[at(i, j + 1)])
            };
        }
    }
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if eq(a[i], b[j]) && table[at(i, j)] == table[at(i + 1, j + 1)] + 1 {
            out.push((a[i], b[j]));
            i += 1;
            j += 1;
        } else if table[at(i + 1, j)] >= table[at(i, j + 1)] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse_method, AstBuilder, SourceRange};

    fn all_pairs_preorder(t: &Ast) -> Vec<(NodeId, NodeId)> {
        t.preorder().map(|n| (n, n)).collect()
    }

    #[test]
    fn identical_trees_fully_mapped() {
        let t = parse_method("void f(int a){ if (a > 0 && b) { x(a); } else { y(); } return; }")
            .unwrap();
        let m = match_trees(&t, &t, &MatchConfig::default());
        assert_eq!(m.pairs().collect::<Vec<_>>(), all_pairs_preorder(&t));
    }

    #[test]
    fn renamed_leaf_stays_mapped() {
        let pre = parse_method("void run(){ if (!delivered && ok()) { notify(delivered); } }").unwrap();
        let post = parse_method("void run(){ if (!dispatched && ok()) { notify(dispatched); } }").unwrap();
        let m = match_trees(&pre, &post, &MatchConfig::default());
        assert_eq!(m.len(), pre.len());
        assert_eq!(pre.len(), post.len());
        for (a, b) in m.pairs() {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lcs_prefers_earliest() {
        let pairs = lcs(&[1, 2, 1], &[1], |a, b| a == b);
        assert_eq!(pairs, vec![(1, 1)]);
        assert_eq!(lcs(&[1, 2, 3], &[2, 3, 1], |a, b| a == b), vec![(2, 2), (3, 3)]);
        assert!(lcs::<u8>(&[], &[1], |a, b| a == b).is_empty());
    }

    fn build(shape: &[(usize, NodeKind)]) -> Ast {
        // shape: (depth, kind) in pre-order
        let mut b = AstBuilder::new();
        for &(depth, kind) in shape {
            while b.depth() > depth {
                b.close();
            }
            b.open(kind, "", SourceRange::default());
        }
        while b.depth() > 0 {
            b.close();
        }
        b.finish()
    }

    #[test]
    fn single_nodes_map_iff_kinds_agree() {
        let a = build(&[(0, NodeKind::Block)]);
        let b = build(&[(0, NodeKind::Block)]);
        let c = build(&[(0, NodeKind::IfStatement)]);
        assert_eq!(match_trees(&a, &b, &MatchConfig::default()).len(), 1);
        assert_eq!(match_trees(&a, &c, &MatchConfig::default()).len(), 0);
    }
}
