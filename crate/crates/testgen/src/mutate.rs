//! Source-level mutations: the catalog transformations plus random edits.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::gen;
use crate::model::{Case, Expr, Method, Stmt};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Mutation {
    AddConditionalStatement,
    AddConjunctOrDisjunct,
    AdjustConditionBoundary,
    ConditionalToBooleanReturn,
    ConditionalToExpression,
    ConditionalToSwitch,
    ExtendElseWithIf,
    ExtendIfWithElse,
    FlipLogicOperator,
    MoveInwardCondition,
    MoveOutwardCondition,
    RemoveConditionalStatement,
    RemoveConjunctOrDisjunct,
    RemoveElse,
    ReverseCondition,
    SwapThenAndElse,
    UnwrapStatementFromBlock,
    UnwrapStatementFromConditional,
    WrapStatementInBlock,
    WrapStatementInConditional,
    InsertStatement,
    DeleteStatement,
    EditExpression,
    SwapStatements,
}

impl Mutation {
    pub const ALL: [Mutation; 24] = [
        Mutation::AddConditionalStatement,
        Mutation::AddConjunctOrDisjunct,
        Mutation::AdjustConditionBoundary,
        Mutation::ConditionalToBooleanReturn,
        Mutation::ConditionalToExpression,
        Mutation::ConditionalToSwitch,
        Mutation::ExtendElseWithIf,
        Mutation::ExtendIfWithElse,
        Mutation::FlipLogicOperator,
        Mutation::MoveInwardCondition,
        Mutation::MoveOutwardCondition,
        Mutation::RemoveConditionalStatement,
        Mutation::RemoveConjunctOrDisjunct,
        Mutation::RemoveElse,
        Mutation::ReverseCondition,
        Mutation::SwapThenAndElse,
        Mutation::UnwrapStatementFromBlock,
        Mutation::UnwrapStatementFromConditional,
        Mutation::WrapStatementInBlock,
        Mutation::WrapStatementInConditional,
        Mutation::InsertStatement,
        Mutation::DeleteStatement,
        Mutation::EditExpression,
        Mutation::SwapStatements,
    ];

    pub fn is_catalog(self) -> bool {
        !matches!(
            self,
            Mutation::InsertStatement
                | Mutation::DeleteStatement
                | Mutation::EditExpression
                | Mutation::SwapStatements
        )
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Step {
    Item(usize),
    Then,
    Else,
    Case(usize, usize),
}

type Path = Vec<Step>;

fn collect(body: &[Stmt]) -> Vec<Path> {
    fn walk(s: &Stmt, prefix: &mut Path, out: &mut Vec<Path>) {
        let visit = |step: Step, child: &Stmt, prefix: &mut Path, out: &mut Vec<Path>| {
            prefix.push(step);
            out.push(prefix.clone());
            walk(child, prefix, out);
            prefix.pop();
        };
        match s {
            Stmt::If { then, els, .. } => {
                visit(Step::Then, then, prefix, out);
                if let Some(e) = els {
                    visit(Step::Else, e, prefix, out);
                }
            }
            Stmt::Block(items) => {
                for (i, c) in items.iter().enumerate() {
                    visit(Step::Item(i), c, prefix, out);
                }
            }
            Stmt::Switch { cases, .. } => {
                for (ci, case) in cases.iter().enumerate() {
                    for (j, c) in case.body.iter().enumerate() {
                        visit(Step::Case(ci, j), c, prefix, out);
                    }
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    for (i, s) in body.iter().enumerate() {
        prefix.push(Step::Item(i));
        out.push(prefix.clone());
        walk(s, &mut prefix, &mut out);
        prefix.pop();
    }
    out
}

fn stmt_mut<'a>(body: &'a mut [Stmt], path: &[Step]) -> &'a mut Stmt {
    let Some((Step::Item(i), rest)) = path.split_first() else { panic!("bad path") };
    let mut cur = &mut body[*i];
    for step in rest {
        cur = match (cur, step) {
            (Stmt::If { then, .. }, Step::Then) => then,
            (Stmt::If { els: Some(e), .. }, Step::Else) => e,
            (Stmt::Block(items), Step::Item(i)) => &mut items[*i],
            (Stmt::Switch { cases, .. }, Step::Case(c, j)) => &mut cases[*c].body[*j],
            _ => panic!("bad path"),
        };
    }
    cur
}

fn stmt<'a>(body: &'a [Stmt], path: &[Step]) -> &'a Stmt {
    let Some((Step::Item(i), rest)) = path.split_first() else { panic!("bad path") };
    let mut cur = &body[*i];
    for step in rest {
        cur = match (cur, step) {
            (Stmt::If { then, .. }, Step::Then) => then,
            (Stmt::If { els: Some(e), .. }, Step::Else) => e,
            (Stmt::Block(items), Step::Item(i)) => &items[*i],
            (Stmt::Switch { cases, .. }, Step::Case(c, j)) => &cases[*c].body[*j],
            _ => panic!("bad path"),
        };
    }
    cur
}

/// The statement list holding the node at `path`, and its index there.
/// `None` if the node is an if branch rather than a list element.
fn list_mut<'a>(body: &'a mut Vec<Stmt>, path: &[Step]) -> Option<(&'a mut Vec<Stmt>, usize)> {
    let (last, parent) = path.split_last()?;
    if parent.is_empty() {
        let Step::Item(i) = last else { return None };
        return Some((body, *i));
    }
    match (stmt_mut(body, parent), last) {
        (Stmt::Block(items), Step::Item(i)) => Some((items, *i)),
        (Stmt::Switch { cases, .. }, Step::Case(c, j)) => Some((&mut cases[*c].body, *j)),
        _ => None,
    }
}

fn in_list(path: &[Step]) -> bool {
    matches!(path.last(), Some(Step::Item(_)) | Some(Step::Case(..)))
}

fn first_logical_mut(e: &mut Expr) -> Option<&mut Expr> {
    match e {
        Expr::Bin(_, op, _) if *op == "&&" || *op == "||" => Some(e),
        Expr::Bin(l, _, r) => first_logical_mut(l).or_else(|| first_logical_mut(r)),
        Expr::Not(x) | Expr::Paren(x) => first_logical_mut(x),
        _ => None,
    }
}

fn first_boundary_mut(e: &mut Expr) -> Option<&mut &'static str> {
    match e {
        Expr::Bin(_, op, _) if matches!(*op, "<" | "<=" | ">" | ">=") => match e {
            Expr::Bin(_, op, _) => Some(op),
            _ => unreachable!(),
        },
        Expr::Bin(l, _, r) => first_boundary_mut(l).or_else(|| first_boundary_mut(r)),
        Expr::Not(x) | Expr::Paren(x) => first_boundary_mut(x),
        _ => None,
    }
}

fn has_boundary(e: &Expr) -> bool {
    first_boundary_mut(&mut e.clone()).is_some()
}

fn has_logical(e: &Expr) -> bool {
    first_logical_mut(&mut e.clone()).is_some()
}

fn is_if(s: &Stmt) -> bool {
    matches!(s, Stmt::If { .. })
}

fn is_block(s: &Stmt) -> bool {
    matches!(s, Stmt::Block(_))
}

fn pick<R: Rng>(rng: &mut R, paths: Vec<Path>) -> Option<Path> {
    paths.choose(rng).cloned()
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Not(inner) => match *inner {
            Expr::Paren(x) => *x,
            x => x,
        },
        other => Expr::not(other),
    }
}

fn complement(op: &'static str) -> &'static str {
    match op {
        "<" => ">=",
        ">=" => "<",
        ">" => "<=",
        "<=" => ">",
        "==" => "!=",
        "!=" => "==",
        other => other,
    }
}

fn branch_items(s: Stmt) -> Vec<Stmt> {
    match s {
        Stmt::Block(items) => items,
        other => vec![other],
    }
}

/// Applies one mutation of the given kind somewhere in `m`. Returns false
/// if the method has no site where it applies.
pub fn apply<R: Rng>(m: &mut Method, kind: Mutation, rng: &mut R) -> bool {
    let paths = collect(&m.body);
    let body = &mut m.body;
    let ifs = |pred: &dyn Fn(&Stmt) -> bool| -> Vec<Path> {
        paths
            .iter()
            .filter(|p| {
                let s = stmt(body, p);
                is_if(s) && pred(s)
            })
            .cloned()
            .collect()
    };
    use Mutation::*;
    match kind {
        AddConditionalStatement => {
            let cond = gen::condition(rng);
            let then = Stmt::Block(vec![gen::simple_statement(rng)]);
            insert_somewhere(body, &paths, Stmt::if_then(cond, then), rng);
            true
        }
        AddConjunctOrDisjunct => {
            let Some(p) = pick(rng, ifs(&|_| true)) else { return false };
            let op = if rng.gen_bool(0.5) { "&&" } else { "||" };
            let extra = gen::condition_atom(rng);
            let Stmt::If { cond, .. } = stmt_mut(body, &p) else { unreachable!() };
            *cond = Expr::bin(cond.clone(), op, extra);
            true
        }
        AdjustConditionBoundary => {
            let targets = ifs(&|s| matches!(s, Stmt::If { cond, .. } if has_boundary(cond)));
            let Some(p) = pick(rng, targets) else { return false };
            let Stmt::If { cond, .. } = stmt_mut(body, &p) else { unreachable!() };
            let op = first_boundary_mut(cond).unwrap();
            *op = match *op {
                "<" => "<=",
                "<=" => "<",
                ">" => ">=",
                _ => ">",
            };
            true
        }
        ConditionalToBooleanReturn => {
            let Some(p) = pick(rng, ifs(&|_| true).into_iter().filter(|p| in_list(p)).collect()) else {
                return false;
            };
            let Stmt::If { cond, .. } = stmt(body, &p).clone() else { unreachable!() };
            let (list, i) = list_mut(body, &p).unwrap();
            list[i] = Stmt::Return(Some(cond));
            true
        }
        ConditionalToExpression => {
            let targets: Vec<Path> = ifs(&|s| matches!(s, Stmt::If { els: Some(_), .. }))
                .into_iter()
                .filter(|p| in_list(p))
                .collect();
            let Some(p) = pick(rng, targets) else { return false };
            let Stmt::If { cond, .. } = stmt(body, &p).clone() else { unreachable!() };
            let target = gen::NAMES.choose(rng).unwrap().to_string();
            let ternary = Expr::Ternary(Box::new(cond), Box::new(gen::atom(rng)), Box::new(gen::atom(rng)));
            let (list, i) = list_mut(body, &p).unwrap();
            list[i] = Stmt::Assign(target, ternary);
            true
        }
        ConditionalToSwitch => {
            let Some(p) = pick(rng, ifs(&|_| true).into_iter().filter(|p| in_list(p)).collect()) else {
                return false;
            };
            let Stmt::If { then, els, .. } = stmt(body, &p).clone() else { unreachable!() };
            let mut first = branch_items(*then);
            first.push(Stmt::Break);
            let mut cases = vec![Case { label: Some(Expr::Num(1)), body: first }];
            if let Some(e) = els {
                cases.push(Case { label: None, body: branch_items(*e) });
            }
            let (list, i) = list_mut(body, &p).unwrap();
            list[i] = Stmt::Switch { selector: gen::name(rng), cases };
            true
        }
        ExtendElseWithIf => {
            let targets = ifs(&|s| matches!(s, Stmt::If { els: Some(e), .. } if !is_if(e)));
            let Some(p) = pick(rng, targets) else { return false };
            let c = gen::condition(rng);
            let Stmt::If { els: Some(e), .. } = stmt_mut(body, &p) else { unreachable!() };
            let old = std::mem::replace(&mut **e, Stmt::Break);
            let old = if is_block(&old) { old } else { Stmt::Block(vec![old]) };
            **e = Stmt::if_then(c, old);
            true
        }
        ExtendIfWithElse => {
            let Some(p) = pick(rng, ifs(&|s| matches!(s, Stmt::If { els: None, .. }))) else {
                return false;
            };
            let extra = gen::simple_statement(rng);
            let Stmt::If { els, .. } = stmt_mut(body, &p) else { unreachable!() };
            *els = Some(Box::new(Stmt::Block(vec![extra])));
            true
        }
        FlipLogicOperator => {
            let targets = ifs(&|s| matches!(s, Stmt::If { cond, .. } if has_logical(cond)));
            let Some(p) = pick(rng, targets) else { return false };
            let Stmt::If { cond, .. } = stmt_mut(body, &p) else { unreachable!() };
            if let Some(Expr::Bin(_, op, _)) = first_logical_mut(cond) {
                *op = if *op == "&&" { "||" } else { "&&" };
            }
            true
        }
        MoveInwardCondition => {
            let targets = ifs(&|s| {
                matches!(s, Stmt::If { cond: Expr::Bin(_, "&&", _), then, .. }
                    if matches!(&**then, Stmt::Block(items) if items.iter().any(is_if)))
            });
            let Some(p) = pick(rng, targets) else { return false };
            let Stmt::If { cond, then, .. } = stmt_mut(body, &p) else { unreachable!() };
            let Expr::Bin(l, _, r) = cond.clone() else { unreachable!() };
            *cond = *l;
            let Stmt::Block(items) = &mut **then else { unreachable!() };
            let inner = items.iter_mut().find(|s| is_if(s)).unwrap();
            let Stmt::If { cond: ic, .. } = inner else { unreachable!() };
            *ic = Expr::bin(*r, "&&", ic.clone());
            true
        }
        MoveOutwardCondition => {
            let targets = ifs(&|s| {
                matches!(s, Stmt::If { then, .. }
                    if matches!(&**then, Stmt::Block(items)
                        if items.iter().any(|i| matches!(i, Stmt::If { cond: Expr::Bin(_, "&&", _), .. }))))
            });
            let Some(p) = pick(rng, targets) else { return false };
            let Stmt::If { cond, then, .. } = stmt_mut(body, &p) else { unreachable!() };
            let Stmt::Block(items) = &mut **then else { unreachable!() };
            let inner = items
                .iter_mut()
                .find(|i| matches!(i, Stmt::If { cond: Expr::Bin(_, "&&", _), .. }))
                .unwrap();
            let Stmt::If { cond: ic, .. } = inner else { unreachable!() };
            let Expr::Bin(l, _, r) = ic.clone() else { unreachable!() };
            *ic = *r;
            *cond = Expr::bin(cond.clone(), "&&", *l);
            true
        }
        RemoveConditionalStatement => {
            let Some(p) = pick(rng, ifs(&|_| true).into_iter().filter(|p| in_list(p)).collect()) else {
                return false;
            };
            let (list, i) = list_mut(body, &p).unwrap();
            list.remove(i);
            true
        }
        RemoveConjunctOrDisjunct => {
            let targets = ifs(&|s| matches!(s, Stmt::If { cond: Expr::Bin(_, "&&" | "||", _), .. }));
            let Some(p) = pick(rng, targets) else { return false };
            let keep_left = rng.gen_bool(0.5);
            let Stmt::If { cond, .. } = stmt_mut(body, &p) else { unreachable!() };
            let Expr::Bin(l, _, r) = cond.clone() else { unreachable!() };
            *cond = if keep_left { *l } else { *r };
            true
        }
        RemoveElse => {
            let Some(p) = pick(rng, ifs(&|s| matches!(s, Stmt::If { els: Some(_), .. }))) else {
                return false;
            };
            let Stmt::If { els, .. } = stmt_mut(body, &p) else { unreachable!() };
            *els = None;
            true
        }
        ReverseCondition => {
            let Some(p) = pick(rng, ifs(&|_| true)) else { return false };
            let flip_op = rng.gen_bool(0.5);
            let Stmt::If { cond, .. } = stmt_mut(body, &p) else { unreachable!() };
            match cond {
                Expr::Bin(_, op, _) if flip_op && complement(op) != *op => *op = complement(op),
                _ => *cond = negate(cond.clone()),
            }
            true
        }
        SwapThenAndElse => {
            let targets = ifs(&|s| matches!(s, Stmt::If { els: Some(e), .. } if !is_if(e)));
            let Some(p) = pick(rng, targets) else { return false };
            let Stmt::If { cond, then, els: Some(e) } = stmt_mut(body, &p) else { unreachable!() };
            std::mem::swap(then, e);
            *cond = negate(cond.clone());
            true
        }
        UnwrapStatementFromBlock => {
            // A lone if inside the braces would capture a following else.
            let targets = ifs(&|s| {
                matches!(s, Stmt::If { then, .. } if matches!(&**then, Stmt::Block(v) if v.len() == 1 && !is_if(&v[0])))
            });
            let Some(p) = pick(rng, targets) else { return false };
            let Stmt::If { then, .. } = stmt_mut(body, &p) else { unreachable!() };
            let Stmt::Block(mut v) = std::mem::replace(&mut **then, Stmt::Break) else { unreachable!() };
            **then = v.pop().unwrap();
            true
        }
        UnwrapStatementFromConditional => {
            let Some(p) = pick(rng, ifs(&|_| true).into_iter().filter(|p| in_list(p)).collect()) else {
                return false;
            };
            let Stmt::If { then, .. } = stmt(body, &p).clone() else { unreachable!() };
            let (list, i) = list_mut(body, &p).unwrap();
            list.splice(i..=i, branch_items(*then));
            true
        }
        WrapStatementInBlock => {
            let targets = ifs(&|s| matches!(s, Stmt::If { then, .. } if !is_block(then)));
            let Some(p) = pick(rng, targets) else { return false };
            let Stmt::If { then, .. } = stmt_mut(body, &p) else { unreachable!() };
            let old = std::mem::replace(&mut **then, Stmt::Break);
            **then = Stmt::Block(vec![old]);
            true
        }
        WrapStatementInConditional => {
            let targets: Vec<Path> = paths
                .iter()
                .filter(|p| in_list(p) && !is_if(stmt(body, p)) && stmt(body, p) != &Stmt::Break)
                .cloned()
                .collect();
            let Some(p) = pick(rng, targets) else { return false };
            let c = gen::condition(rng);
            let (list, i) = list_mut(body, &p).unwrap();
            let old = std::mem::replace(&mut list[i], Stmt::Break);
            list[i] = Stmt::if_then(c, Stmt::Block(vec![old]));
            true
        }
        InsertStatement => {
            let s = gen::simple_statement(rng);
            insert_somewhere(body, &paths, s, rng);
            true
        }
        DeleteStatement => {
            let targets: Vec<Path> = paths.iter().filter(|p| in_list(p)).cloned().collect();
            let Some(p) = pick(rng, targets) else { return false };
            let (list, i) = list_mut(body, &p).unwrap();
            list.remove(i);
            true
        }
        EditExpression => {
            let targets: Vec<Path> = paths
                .iter()
                .filter(|p| matches!(stmt(body, p), Stmt::Expr(_) | Stmt::Assign(..) | Stmt::Local(..)))
                .cloned()
                .collect();
            let Some(p) = pick(rng, targets) else { return false };
            let fresh = gen::atom(rng);
            match stmt_mut(body, &p) {
                Stmt::Expr(Expr::Call(_, args)) if !args.is_empty() => args[0] = fresh,
                Stmt::Expr(e) | Stmt::Assign(_, e) | Stmt::Local(_, _, e) => *e = fresh,
                _ => unreachable!(),
            }
            true
        }
        SwapStatements => {
            let targets: Vec<Path> = paths
                .iter()
                .filter(|p| {
                    in_list(p) && {
                        let mut next = p.to_vec();
                        match next.last_mut() {
                            Some(Step::Item(i)) | Some(Step::Case(_, i)) => *i += 1,
                            _ => {}
                        }
                        paths.contains(&next)
                    }
                })
                .cloned()
                .collect();
            let Some(p) = pick(rng, targets) else { return false };
            let (list, i) = list_mut(body, &p).unwrap();
            list.swap(i, i + 1);
            true
        }
    }
}

fn insert_somewhere<R: Rng>(body: &mut Vec<Stmt>, paths: &[Path], s: Stmt, rng: &mut R) {
    let blocks: Vec<&Path> = paths.iter().filter(|p| is_block(stmt(body, p))).collect();
    if blocks.is_empty() || rng.gen_bool(0.4) {
        let at = rng.gen_range(0..=body.len());
        body.insert(at, s);
        return;
    }
    let p = (*blocks.choose(rng).unwrap()).clone();
    let Stmt::Block(items) = stmt_mut(body, &p) else { unreachable!() };
    let at = rng.gen_range(0..=items.len());
    items.insert(at, s);
}

/// Applies a random applicable mutation, drawing catalog kinds with the
/// given probability and random edits otherwise.
pub fn mutate<R: Rng>(m: &Method, catalog_bias: f64, rng: &mut R) -> (Method, Mutation) {
    let mut out = m.clone();
    for _ in 0..32 {
        let kind = if rng.gen_bool(catalog_bias) {
            *Mutation::ALL[..20].choose(rng).unwrap()
        } else {
            *Mutation::ALL[20..].choose(rng).unwrap()
        };
        if apply(&mut out, kind, rng) && out != *m {
            return (out, kind);
        }
        out = m.clone();
    }
    apply(&mut out, Mutation::InsertStatement, rng);
    (out, Mutation::InsertStatement)
}
