//! Random method generation.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{Case, Expr, Method, Stmt};

pub const NAMES: &[&str] = &["a", "b", "count", "items", "server", "flag", "value", "limit", "state"];
pub const CALLS: &[&str] = &["process", "log", "update", "notify", "check", "reset", "send", "close"];
pub const PREDICATES: &[&str] = &["isReady", "isEmpty", "hasNext", "isValid", "accepts"];
const RELATIONAL: &[&str] = &["<", "<=", ">", ">=", "==", "!="];

pub fn name<R: Rng>(rng: &mut R) -> Expr {
    Expr::name(NAMES.choose(rng).unwrap())
}

pub fn atom<R: Rng>(rng: &mut R) -> Expr {
    match rng.gen_range(0..4) {
        0 => name(rng),
        1 => Expr::Num(rng.gen_range(0..100)),
        2 => Expr::call(CALLS.choose(rng).unwrap(), vec![name(rng)]),
        _ => Expr::Field(NAMES.choose(rng).unwrap().to_string(), "size".into()),
    }
}

/// A single comparison or predicate.
pub fn condition_atom<R: Rng>(rng: &mut R) -> Expr {
    match rng.gen_range(0..5) {
        0 | 1 => Expr::bin(name(rng), RELATIONAL.choose(rng).unwrap(), Expr::Num(rng.gen_range(0..10))),
        2 => Expr::bin(name(rng), "!=", Expr::Null),
        3 => Expr::call(PREDICATES.choose(rng).unwrap(), vec![name(rng)]),
        _ => name(rng),
    }
}

pub fn condition<R: Rng>(rng: &mut R) -> Expr {
    let mut e = condition_atom(rng);
    while rng.gen_bool(0.3) {
        let op = if rng.gen_bool(0.6) { "&&" } else { "||" };
        e = Expr::bin(e, op, condition_atom(rng));
    }
    if rng.gen_bool(0.1) {
        e = Expr::not(e);
    }
    e
}

pub fn simple_statement<R: Rng>(rng: &mut R) -> Stmt {
    match rng.gen_range(0..5) {
        0 | 1 => Stmt::call(CALLS.choose(rng).unwrap(), vec![atom(rng)]),
        2 => Stmt::Assign(NAMES.choose(rng).unwrap().to_string(), atom(rng)),
        3 => Stmt::Local("int", format!("t{}", rng.gen_range(0..50)), atom(rng)),
        _ => Stmt::Assign(
            NAMES.choose(rng).unwrap().to_string(),
            Expr::bin(name(rng), "+", Expr::Num(rng.gen_range(1..5))),
        ),
    }
}

pub fn statement<R: Rng>(rng: &mut R, depth: usize) -> Stmt {
    if depth >= 3 {
        return simple_statement(rng);
    }
    match rng.gen_range(0..10) {
        0..=4 => simple_statement(rng),
        5 | 6 => {
            let then = branch(rng, depth);
            Stmt::if_then(condition(rng), then)
        }
        7 => {
            let then = branch(rng, depth);
            let els = if rng.gen_bool(0.3) {
                Stmt::if_then(condition(rng), branch(rng, depth + 1))
            } else {
                branch(rng, depth)
            };
            Stmt::if_else(condition(rng), then, els)
        }
        8 => Stmt::Assign(
            NAMES.choose(rng).unwrap().to_string(),
            Expr::Ternary(
                Box::new(condition_atom(rng)),
                Box::new(atom(rng)),
                Box::new(atom(rng)),
            ),
        ),
        _ => {
            let n = rng.gen_range(1..=3);
            let mut cases: Vec<Case> = (0..n)
                .map(|i| Case {
                    label: Some(Expr::Num(i)),
                    body: vec![simple_statement(rng), Stmt::Break],
                })
                .collect();
            if rng.gen_bool(0.5) {
                cases.push(Case { label: None, body: vec![simple_statement(rng)] });
            }
            Stmt::Switch { selector: name(rng), cases }
        }
    }
}

fn branch<R: Rng>(rng: &mut R, depth: usize) -> Stmt {
    if rng.gen_bool(0.2) {
        simple_statement(rng)
    } else {
        let n = rng.gen_range(1..=3);
        Stmt::Block((0..n).map(|_| statement(rng, depth + 1)).collect())
    }
}

pub fn method<R: Rng>(rng: &mut R, name: &str) -> Method {
    let n = rng.gen_range(2..=6);
    let mut body: Vec<Stmt> = (0..n).map(|_| statement(rng, 0)).collect();
    let ret = if rng.gen_bool(0.3) {
        body.push(Stmt::Return(Some(atom(rng))));
        "int"
    } else {
        "void"
    };
    let params = (0..rng.gen_range(0..=2))
        .map(|i| ("int", ["a", "b"][i].to_string()))
        .collect();
    Method { ret, name: name.to_string(), params, body }
}
