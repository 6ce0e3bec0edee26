//! Rule predicates over an edit script, its mapping and both trees.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{MicroChangeInstance, MicroChangeType as T};
use crate::ast::{Ast, NodeId, NodeKind as K};
use crate::treediff::{ActionId, EditOp, EditScript, MappingStore, Side};

const RELATIONAL: [&str; 4] = ["<", "<=", ">", ">="];

fn complement(op: &str) -> Option<&'static str> {
    Some(match op {
        "==" => "!=",
        "!=" => "==",
        "<" => ">=",
        ">=" => "<",
        ">" => "<=",
        "<=" => ">",
        _ => return None,
    })
}

fn is_logical(op: &str) -> bool {
    op == "&&" || op == "||"
}

fn is_literal(kind: K) -> bool {
    matches!(
        kind,
        K::NumberLiteral | K::StringLiteral | K::CharLiteral | K::BooleanLiteral | K::NullLiteral
    )
}

struct Ctx<'a> {
    m: &'a MappingStore,
    pre: &'a Ast,
    post: &'a Ast,
    ins: HashMap<NodeId, ActionId>,
    del: HashMap<NodeId, ActionId>,
    upd: HashMap<NodeId, ActionId>,
    mov: HashMap<NodeId, ActionId>,
}

#[derive(Default)]
struct Found {
    hits: BTreeSet<(T, Side, NodeId, Vec<ActionId>)>,
    /// Deleted pre ifs explained by a conversion rule.
    converted: BTreeSet<NodeId>,
    /// Deleted pre ifs explained by UnwrapStatementFromConditional.
    unwrapped: BTreeSet<NodeId>,
    /// Inserted post ifs explained by a wrap or else-if extension.
    claimed_post: BTreeSet<NodeId>,
}

impl Found {
    fn add(&mut self, ty: T, side: Side, anchor: NodeId, actions: BTreeSet<ActionId>) {
        if !actions.is_empty() {
            self.hits.insert((ty, side, anchor, actions.into_iter().collect()));
        }
    }
}

// Tree shape helpers shared by both sides.

fn cond(ast: &Ast, n: NodeId) -> Option<NodeId> {
    ast.child(n, 0).filter(|&c| ast.kind(c) == K::ConditionExpr)
}

fn guard(ast: &Ast, n: NodeId) -> Option<NodeId> {
    cond(ast, n).and_then(|c| ast.child(c, 0))
}

fn then_branch(ast: &Ast, n: NodeId) -> Option<NodeId> {
    ast.child(n, 1)
}

fn else_clause(ast: &Ast, n: NodeId) -> Option<NodeId> {
    ast.child(n, 2).filter(|&c| ast.kind(c) == K::ElseClause)
}

fn else_branch(ast: &Ast, n: NodeId) -> Option<NodeId> {
    else_clause(ast, n).and_then(|e| ast.child(e, 0))
}

/// Statements directly controlled by a branch: a block's children, or the
/// branch itself.
fn branch_statements(ast: &Ast, branch: NodeId) -> Vec<NodeId> {
    if ast.kind(branch) == K::Block {
        ast.children(branch).to_vec()
    } else {
        vec![branch]
    }
}

/// Branches of `n` whose statements it governs directly; an else-if is a
/// separate conditional and is left out.
fn own_branches(ast: &Ast, n: NodeId) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = then_branch(ast, n).into_iter().collect();
    if let Some(e) = else_branch(ast, n) {
        if ast.kind(e) != K::IfStatement {
            out.push(e);
        }
    }
    out
}

fn single_statement(ast: &Ast, branch: NodeId) -> Option<NodeId> {
    match branch_statements(ast, branch).as_slice() {
        [s] => Some(*s),
        _ => None,
    }
}

fn strip_parens(ast: &Ast, mut n: NodeId) -> NodeId {
    while ast.kind(n) == K::ParenthesizedExpression && ast.children(n).len() == 1 {
        n = ast.children(n)[0];
    }
    n
}

/// Nearest enclosing if, switch or ternary.
fn governor(ast: &Ast, n: NodeId) -> Option<NodeId> {
    ast.ancestors(n).find(|&a| {
        matches!(ast.kind(a), K::IfStatement | K::SwitchStatement | K::ConditionalExpression)
    })
}

fn within(ast: &Ast, n: NodeId, root: NodeId) -> bool {
    n == root || ast.is_descendant(n, root)
}

fn boolean_return(ast: &Ast, stmt: NodeId) -> Option<bool> {
    if ast.kind(stmt) != K::ReturnStatement {
        return None;
    }
    let e = strip_parens(ast, ast.child(stmt, 0)?);
    if ast.kind(e) != K::BooleanLiteral {
        return None;
    }
    match ast.label(e) {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

impl<'a> Ctx<'a> {
    fn new(script: &EditScript, m: &'a MappingStore, pre: &'a Ast, post: &'a Ast) -> Self {
        let mut ctx = Ctx {
            m,
            pre,
            post,
            ins: HashMap::new(),
            del: HashMap::new(),
            upd: HashMap::new(),
            mov: HashMap::new(),
        };
        for a in script.iter() {
            let table = match a.op {
                EditOp::Insert => &mut ctx.ins,
                EditOp::Delete => &mut ctx.del,
                EditOp::Update => &mut ctx.upd,
                EditOp::Move => &mut ctx.mov,
            };
            table.insert(a.node.id, a.id);
        }
        ctx
    }

    fn fwd(&self, a: NodeId) -> Option<NodeId> {
        self.m.pre_partner(a)
    }

    fn back(&self, b: NodeId) -> Option<NodeId> {
        self.m.post_partner(b)
    }

    /// DEL, UPD and MOV actions on the pre subtree rooted at `a`.
    fn pre_actions(&self, a: NodeId, out: &mut BTreeSet<ActionId>) {
        for n in self.pre.subtree(a) {
            for t in [&self.del, &self.upd, &self.mov] {
                if let Some(&id) = t.get(&n) {
                    out.insert(id);
                }
            }
        }
    }

    /// INS actions on the post subtree rooted at `b`, plus UPD and MOV of
    /// nodes that end up in it.
    fn post_actions(&self, b: NodeId, out: &mut BTreeSet<ActionId>) {
        for n in self.post.subtree(b) {
            if let Some(&id) = self.ins.get(&n) {
                out.insert(id);
            } else if let Some(p) = self.back(n) {
                for t in [&self.upd, &self.mov] {
                    if let Some(&id) = t.get(&p) {
                        out.insert(id);
                    }
                }
            }
        }
    }

    fn take(&self, table: &HashMap<NodeId, ActionId>, n: NodeId, out: &mut BTreeSet<ActionId>) {
        if let Some(&id) = table.get(&n) {
            out.insert(id);
        }
    }

    /// Post operand that maps into the pre subtree `region`, looking
    /// through inserted parentheses. Returns the pre partner.
    fn post_survivor(&self, op: NodeId, region: NodeId, acc: &mut BTreeSet<ActionId>) -> Option<NodeId> {
        let mut n = op;
        let mut wrappers = Vec::new();
        loop {
            if let Some(p) = self.back(n) {
                if !within(self.pre, p, region) {
                    return None;
                }
                acc.extend(wrappers.iter().filter_map(|w| self.ins.get(w)));
                self.take(&self.mov, p, acc);
                return Some(p);
            }
            if self.post.kind(n) != K::ParenthesizedExpression || self.post.children(n).len() != 1 {
                return None;
            }
            wrappers.push(n);
            n = self.post.children(n)[0];
        }
    }

    /// Pre operand that maps into the post subtree `region`, looking
    /// through deleted parentheses. Returns the post partner.
    fn pre_survivor(&self, op: NodeId, region: NodeId, acc: &mut BTreeSet<ActionId>) -> Option<NodeId> {
        let mut n = op;
        let mut wrappers = Vec::new();
        loop {
            if let Some(p) = self.fwd(n) {
                if !within(self.post, p, region) {
                    return None;
                }
                acc.extend(wrappers.iter().filter_map(|w| self.del.get(w)));
                self.take(&self.mov, n, acc);
                return Some(p);
            }
            if self.pre.kind(n) != K::ParenthesizedExpression || self.pre.children(n).len() != 1 {
                return None;
            }
            wrappers.push(n);
            n = self.pre.children(n)[0];
        }
    }

    fn post_fresh(&self, op: NodeId) -> bool {
        self.ins.contains_key(&op) && self.back(strip_parens(self.post, op)).is_none()
    }

    fn pre_fresh(&self, op: NodeId) -> bool {
        self.del.contains_key(&op) && self.fwd(strip_parens(self.pre, op)).is_none()
    }
}

/// Runs every rule and returns the instances sorted by anchor and type name.
pub fn detect_micro_changes(
    script: &EditScript,
    mappings: &MappingStore,
    pre: &Ast,
    post: &Ast,
) -> Vec<MicroChangeInstance> {
    if script.is_empty() || pre.is_empty() || post.is_empty() {
        return Vec::new();
    }
    let ctx = Ctx::new(script, mappings, pre, post);
    let mut found = Found::default();

    let mapped_ifs: Vec<(NodeId, NodeId)> = pre
        .preorder()
        .filter(|&a| pre.kind(a) == K::IfStatement)
        .filter_map(|a| ctx.fwd(a).filter(|&b| post.kind(b) == K::IfStatement).map(|b| (a, b)))
        .collect();

    for &(a, b) in &mapped_ifs {
        condition_rules(&ctx, a, b, &mut found);
        else_rules(&ctx, a, b, &mut found);
        block_rules(&ctx, a, b, &mut found);
        swap_rule(&ctx, a, b, &mut found);
    }
    nesting_rules(&ctx, &mapped_ifs, &mut found);

    let deleted_ifs: Vec<NodeId> =
        pre.preorder().filter(|&a| pre.kind(a) == K::IfStatement && ctx.del.contains_key(&a)).collect();
    let inserted_ifs: Vec<NodeId> =
        post.preorder().filter(|&b| post.kind(b) == K::IfStatement && ctx.ins.contains_key(&b)).collect();

    for &a in &deleted_ifs {
        boolean_return_rule(&ctx, a, &mut found);
        expression_rule(&ctx, a, &mut found);
    }
    switch_rule(&ctx, &mut found);
    for &a in &deleted_ifs {
        if !found.converted.contains(&a) {
            unwrap_conditional_rule(&ctx, a, &mut found);
        }
    }
    for &b in &inserted_ifs {
        wrap_conditional_rule(&ctx, b, &mut found);
    }

    for &a in &deleted_ifs {
        let nested = pre.ancestors(a).any(|p| pre.kind(p) == K::IfStatement && ctx.del.contains_key(&p));
        if nested || found.converted.contains(&a) || found.unwrapped.contains(&a) {
            continue;
        }
        let mut acts = BTreeSet::new();
        ctx.pre_actions(a, &mut acts);
        found.add(T::RemoveConditionalStatement, Side::Pre, a, acts);
    }
    for &b in &inserted_ifs {
        let nested =
            post.ancestors(b).any(|p| post.kind(p) == K::IfStatement && ctx.ins.contains_key(&p));
        if nested || found.claimed_post.contains(&b) {
            continue;
        }
        let mut acts = BTreeSet::new();
        ctx.post_actions(b, &mut acts);
        found.add(T::AddConditionalStatement, Side::Post, b, acts);
    }

    let mut out: Vec<MicroChangeInstance> = found
        .hits
        .into_iter()
        .map(|(ty, side, id, actions)| MicroChangeInstance::build(ty, side, id, actions, script, pre, post))
        .collect();
    out.sort_by(|x, y| {
        (x.anchor.side, x.anchor.id, x.kind.name(), &x.actions)
            .cmp(&(y.anchor.side, y.anchor.id, y.kind.name(), &y.actions))
    });
    out
}

fn condition_rules(ctx: &Ctx, a: NodeId, b: NodeId, found: &mut Found) {
    let (pre, post) = (ctx.pre, ctx.post);
    let (Some(ca), Some(cb)) = (cond(pre, a), cond(post, b)) else { return };

    for x in post.descendants(cb) {
        if !ctx.ins.contains_key(&x) {
            continue;
        }
        let kids = post.children(x);
        match (post.kind(x), post.label(x)) {
            (K::InfixExpression, op) if is_logical(op) && kids.len() == 2 => {
                for (keep, fresh) in [(kids[0], kids[1]), (kids[1], kids[0])] {
                    let mut acts = BTreeSet::from([ctx.ins[&x]]);
                    if ctx.post_fresh(fresh) && ctx.post_survivor(keep, ca, &mut acts).is_some() {
                        ctx.post_actions(fresh, &mut acts);
                        found.add(T::AddConjunctOrDisjunct, Side::Pre, a, acts);
                        break;
                    }
                }
            }
            (K::PrefixExpression, "!") if kids.len() == 1 => {
                let mut acts = BTreeSet::from([ctx.ins[&x]]);
                if ctx.post_survivor(kids[0], ca, &mut acts).is_some() {
                    found.add(T::ReverseCondition, Side::Pre, a, acts);
                }
            }
            _ => {}
        }
    }

    for x in pre.descendants(ca) {
        let kids = pre.children(x);
        if let Some(&d) = ctx.del.get(&x) {
            match (pre.kind(x), pre.label(x)) {
                (K::InfixExpression, op) if is_logical(op) && kids.len() == 2 => {
                    for (keep, gone) in [(kids[0], kids[1]), (kids[1], kids[0])] {
                        let mut acts = BTreeSet::from([d]);
                        if ctx.pre_fresh(gone) && ctx.pre_survivor(keep, cb, &mut acts).is_some() {
                            ctx.pre_actions(gone, &mut acts);
                            found.add(T::RemoveConjunctOrDisjunct, Side::Pre, a, acts);
                            break;
                        }
                    }
                }
                (K::PrefixExpression, "!") if kids.len() == 1 => {
                    let mut acts = BTreeSet::from([d]);
                    if ctx.pre_survivor(kids[0], cb, &mut acts).is_some() {
                        found.add(T::ReverseCondition, Side::Pre, a, acts);
                    }
                }
                _ => {}
            }
        }
        let Some(&u) = ctx.upd.get(&x) else { continue };
        if pre.kind(x) != K::InfixExpression {
            continue;
        }
        let Some(y) = ctx.fwd(x) else { continue };
        let (old, new) = (pre.label(x), post.label(y));
        let acts = BTreeSet::from([u]);
        if is_logical(old) && is_logical(new) {
            found.add(T::FlipLogicOperator, Side::Pre, a, acts);
        } else if complement(old) == Some(new) {
            let literal_updates: BTreeSet<ActionId> = if old == "==" || old == "!=" {
                pre.descendants(x)
                    .filter(|&n| is_literal(pre.kind(n)))
                    .filter_map(|n| ctx.upd.get(&n).copied())
                    .collect()
            } else {
                BTreeSet::new()
            };
            if literal_updates.is_empty() {
                found.add(T::ReverseCondition, Side::Pre, a, acts);
            } else {
                found.add(T::AdjustConditionBoundary, Side::Pre, a, &acts | &literal_updates);
            }
        } else if RELATIONAL.contains(&old) && RELATIONAL.contains(&new) {
            found.add(T::AdjustConditionBoundary, Side::Pre, a, acts);
        }
    }
}

fn else_rules(ctx: &Ctx, a: NodeId, b: NodeId, found: &mut Found) {
    let (pre, post) = (ctx.pre, ctx.post);
    let (ea, eb) = (else_clause(pre, a), else_clause(post, b));
    if let Some(eb) = eb.filter(|e| ctx.ins.contains_key(e)) {
        let mut acts = BTreeSet::new();
        ctx.post_actions(eb, &mut acts);
        found.add(T::ExtendIfWithElse, Side::Pre, a, acts);
    }
    if let Some(ea) = ea.filter(|e| ctx.del.contains_key(e)) {
        let mut acts = BTreeSet::new();
        ctx.pre_actions(ea, &mut acts);
        found.add(T::RemoveElse, Side::Pre, a, acts);
    }
    let (Some(ea), Some(eb)) = (ea, eb) else { return };
    if ctx.fwd(ea) != Some(eb) {
        return;
    }
    let (Some(xa), Some(yb)) = (pre.child(ea, 0), post.child(eb, 0)) else { return };
    if post.kind(yb) != K::IfStatement || !ctx.ins.contains_key(&yb) {
        return;
    }
    let mut acts = BTreeSet::new();
    match ctx.fwd(xa) {
        None => ctx.pre_actions(xa, &mut acts),
        Some(p) if within(post, p, yb) => ctx.take(&ctx.mov, xa, &mut acts),
        Some(_) => return,
    }
    ctx.post_actions(yb, &mut acts);
    found.claimed_post.insert(yb);
    found.add(T::ExtendElseWithIf, Side::Pre, a, acts);
}

/// Wrapping or unwrapping the single statement of a branch in braces.
fn block_rules(ctx: &Ctx, a: NodeId, b: NodeId, found: &mut Found) {
    let (pre, post) = (ctx.pre, ctx.post);
    let mut slots = vec![(then_branch(pre, a), then_branch(post, b))];
    if let (Some(ea), Some(eb)) = (else_clause(pre, a), else_clause(post, b)) {
        if ctx.fwd(ea) == Some(eb) {
            slots.push((pre.child(ea, 0), post.child(eb, 0)));
        }
    }
    for (sa, sb) in slots {
        let (Some(sa), Some(sb)) = (sa, sb) else { continue };
        if post.kind(sb) == K::Block && ctx.ins.contains_key(&sb) && post.children(sb).len() == 1 {
            let inner = post.children(sb)[0];
            if ctx.back(inner) == Some(sa) {
                let mut acts = BTreeSet::from([ctx.ins[&sb]]);
                ctx.take(&ctx.mov, sa, &mut acts);
                found.add(T::WrapStatementInBlock, Side::Pre, a, acts);
            }
        }
        if pre.kind(sa) == K::Block && ctx.del.contains_key(&sa) && pre.children(sa).len() == 1 {
            let inner = pre.children(sa)[0];
            if ctx.fwd(inner) == Some(sb) {
                let mut acts = BTreeSet::from([ctx.del[&sa]]);
                ctx.take(&ctx.mov, inner, &mut acts);
                found.add(T::UnwrapStatementFromBlock, Side::Pre, a, acts);
            }
        }
    }
}

fn swap_rule(ctx: &Ctx, a: NodeId, b: NodeId, found: &mut Found) {
    let (pre, post) = (ctx.pre, ctx.post);
    let (Some(ta), Some(xa), Some(tb), Some(xb)) =
        (then_branch(pre, a), else_branch(pre, a), then_branch(post, b), else_branch(post, b))
    else {
        return;
    };
    let lands_only_in = |from: NodeId, to: NodeId| {
        let partners: Vec<NodeId> =
            branch_statements(pre, from).into_iter().filter_map(|s| ctx.fwd(s)).collect();
        !partners.is_empty() && partners.iter().all(|&p| within(post, p, to))
    };
    if !(lands_only_in(ta, xb) && lands_only_in(xa, tb)) {
        return;
    }
    let mut acts = BTreeSet::new();
    for n in pre.subtree(ta).chain(pre.subtree(xa)) {
        ctx.take(&ctx.mov, n, &mut acts);
    }
    found.add(T::SwapThenAndElse, Side::Pre, a, acts);
}

/// Conditions moving between the guards of nested ifs.
fn nesting_rules(ctx: &Ctx, mapped_ifs: &[(NodeId, NodeId)], found: &mut Found) {
    let (pre, post) = (ctx.pre, ctx.post);
    for &(ao, bo) in mapped_ifs {
        let (Some(cao), Some(cbo)) = (cond(pre, ao), cond(post, bo)) else { continue };
        for &(ai, bi) in mapped_ifs {
            if !pre.is_descendant(ai, ao) || !post.is_descendant(bi, bo) || within(pre, ai, cao) {
                continue;
            }
            let (Some(cai), Some(cbi)) = (cond(pre, ai), cond(post, bi)) else { continue };
            let moves = [(cao, cbi, T::MoveInwardCondition), (cai, cbo, T::MoveOutwardCondition)];
            for (from, to, ty) in moves {
                for e in pre.descendants(from) {
                    let Some(&mv) = ctx.mov.get(&e) else { continue };
                    let Some(e2) = ctx.fwd(e) else { continue };
                    if !post.is_descendant(e2, to) {
                        continue;
                    }
                    let conjunct_before = is_logical(pre.label(e))
                        || pre.parent(e).is_some_and(|p| is_logical(pre.label(p)));
                    let conjunct_after = is_logical(post.label(e2))
                        || post.parent(e2).is_some_and(|p| is_logical(post.label(p)));
                    if !(conjunct_before && conjunct_after) {
                        continue;
                    }
                    let mut acts = BTreeSet::from([mv]);
                    if let Some(p) = pre.parent(e) {
                        ctx.take(&ctx.del, p, &mut acts);
                    }
                    if let Some(p) = post.parent(e2) {
                        ctx.take(&ctx.ins, p, &mut acts);
                    }
                    found.add(ty, Side::Pre, ao, acts);
                }
            }
        }
    }
}

fn boolean_return_rule(ctx: &Ctx, a: NodeId, found: &mut Found) {
    let (pre, post) = (ctx.pre, ctx.post);
    let (Some(g), Some(t)) = (guard(pre, a), then_branch(pre, a)) else { return };
    let Some(then_value) = single_statement(pre, t).and_then(|s| boolean_return(pre, s)) else {
        return;
    };
    let (else_value, trailing) = match else_branch(pre, a) {
        Some(e) => (single_statement(pre, e).and_then(|s| boolean_return(pre, s)), None),
        None => {
            let next = pre.parent(a).and_then(|p| {
                let pos = pre.position(a)?;
                pre.child(p, pos + 1)
            });
            (next.and_then(|s| boolean_return(pre, s)), next)
        }
    };
    if else_value != Some(!then_value) {
        return;
    }
    let g = strip_parens(pre, g);
    for r in post.preorder().filter(|&r| post.kind(r) == K::ReturnStatement) {
        let Some(e) = post.child(r, 0) else { continue };
        let mut e = strip_parens(post, e);
        let mut positive = true;
        if post.kind(e) == K::PrefixExpression && post.label(e) == "!" {
            let Some(inner) = post.child(e, 0) else { continue };
            e = strip_parens(post, inner);
            positive = false;
        }
        if ctx.back(e) != Some(g) || positive != then_value {
            continue;
        }
        let mut acts = BTreeSet::new();
        ctx.pre_actions(a, &mut acts);
        if let Some(s) = trailing {
            ctx.pre_actions(s, &mut acts);
        }
        ctx.post_actions(r, &mut acts);
        found.converted.insert(a);
        found.add(T::ConditionalToBooleanReturn, Side::Pre, a, acts);
        return;
    }
}

fn expression_rule(ctx: &Ctx, a: NodeId, found: &mut Found) {
    let (pre, post) = (ctx.pre, ctx.post);
    let Some(g) = guard(pre, a) else { return };
    let g = strip_parens(pre, g);
    for t in post.preorder().filter(|&t| post.kind(t) == K::ConditionalExpression) {
        // A ternary carried over from outside the removed if is not new.
        if ctx.back(t).is_some_and(|p| !within(pre, p, a)) {
            continue;
        }
        let Some(tg) = post.child(t, 0) else { continue };
        if ctx.back(strip_parens(post, tg)) != Some(g) {
            continue;
        }
        let mut acts = BTreeSet::new();
        ctx.pre_actions(a, &mut acts);
        ctx.post_actions(t, &mut acts);
        found.converted.insert(a);
        found.add(T::ConditionalToExpression, Side::Pre, a, acts);
        return;
    }
}

fn switch_rule(ctx: &Ctx, found: &mut Found) {
    let (pre, post) = (ctx.pre, ctx.post);
    for sw in post.preorder().filter(|&s| post.kind(s) == K::SwitchStatement) {
        if !ctx.ins.contains_key(&sw) {
            continue;
        }
        // Deleted if -> number of its branches absorbed by the switch.
        let mut absorbed: BTreeMap<NodeId, usize> = BTreeMap::new();
        for a in pre.preorder().filter(|&a| pre.kind(a) == K::IfStatement && ctx.del.contains_key(&a)) {
            let n = own_branches(pre, a)
                .into_iter()
                .filter(|&br| {
                    branch_statements(pre, br)
                        .into_iter()
                        .filter_map(|s| ctx.fwd(s))
                        .any(|p| post.is_descendant(p, sw))
                })
                .count();
            if n > 0 {
                absorbed.insert(a, n);
            }
        }
        if absorbed.values().sum::<usize>() < 2 {
            continue;
        }
        let mut acts = BTreeSet::new();
        for &a in absorbed.keys() {
            ctx.pre_actions(a, &mut acts);
            found.converted.insert(a);
        }
        ctx.post_actions(sw, &mut acts);
        let first = *absorbed.keys().next().expect("non-empty");
        found.add(T::ConditionalToSwitch, Side::Pre, first, acts);
    }
}

fn unwrap_conditional_rule(ctx: &Ctx, a: NodeId, found: &mut Found) {
    let (pre, post) = (ctx.pre, ctx.post);
    let target = governor(pre, a).map(|g| ctx.fwd(g));
    let freed = own_branches(pre, a)
        .into_iter()
        .flat_map(|br| branch_statements(pre, br))
        .filter_map(|s| ctx.fwd(s))
        .any(|p| match &target {
            None => governor(post, p).is_none(),
            Some(g) => g.is_some() && governor(post, p) == *g,
        });
    if freed {
        let mut acts = BTreeSet::new();
        ctx.pre_actions(a, &mut acts);
        found.unwrapped.insert(a);
        found.add(T::UnwrapStatementFromConditional, Side::Pre, a, acts);
    }
}

fn wrap_conditional_rule(ctx: &Ctx, b: NodeId, found: &mut Found) {
    let (pre, post) = (ctx.pre, ctx.post);
    let source = governor(post, b).map(|g| ctx.back(g));
    let captured = own_branches(post, b)
        .into_iter()
        .flat_map(|br| branch_statements(post, br))
        .filter_map(|s| ctx.back(s))
        .any(|p| match &source {
            None => governor(pre, p).is_none(),
            Some(g) => g.is_some() && governor(pre, p) == *g,
        });
    if captured {
        let mut acts = BTreeSet::new();
        ctx.post_actions(b, &mut acts);
        found.claimed_post.insert(b);
        found.add(T::WrapStatementInConditional, Side::Post, b, acts);
    }
}
