//! A tiny Java method model that prints to compilable-looking source.

use std::fmt::Write;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Name(String),
    Num(i64),
    Bool(bool),
    Null,
    Field(String, String),
    Call(String, Vec<Expr>),
    Bin(Box<Expr>, &'static str, Box<Expr>),
    Not(Box<Expr>),
    Paren(Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn name(s: &str) -> Expr {
        Expr::Name(s.to_string())
    }

    pub fn bin(l: Expr, op: &'static str, r: Expr) -> Expr {
        Expr::Bin(Box::new(l), op, Box::new(r))
    }

    pub fn not(e: Expr) -> Expr {
        match e {
            Expr::Name(_) | Expr::Call(..) | Expr::Paren(_) | Expr::Field(..) | Expr::Bool(_) => {
                Expr::Not(Box::new(e))
            }
            other => Expr::Not(Box::new(Expr::Paren(Box::new(other)))),
        }
    }

    pub fn call(f: &str, args: Vec<Expr>) -> Expr {
        Expr::Call(f.to_string(), args)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Ternary(..) => 1,
            Expr::Bin(_, op, _) => match *op {
                "||" => 2,
                "&&" => 3,
                "==" | "!=" => 4,
                "<" | "<=" | ">" | ">=" => 5,
                "+" | "-" => 6,
                _ => 7,
            },
            Expr::Not(_) => 8,
            _ => 9,
        }
    }

    /// Prints with the minimal parentheses needed to keep the tree shape.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write(&mut s);
        s
    }

    fn write_operand(&self, out: &mut String, min: u8) {
        if self.precedence() < min {
            out.push('(');
            self.write(out);
            out.push(')');
        } else {
            self.write(out);
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            Expr::Name(n) => out.push_str(n),
            Expr::Num(v) => write!(out, "{v}").unwrap(),
            Expr::Bool(b) => write!(out, "{b}").unwrap(),
            Expr::Null => out.push_str("null"),
            Expr::Field(a, b) => write!(out, "{a}.{b}").unwrap(),
            Expr::Call(f, args) => {
                out.push_str(f);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    a.write(out);
                }
                out.push(')');
            }
            Expr::Bin(l, op, r) => {
                let p = self.precedence();
                l.write_operand(out, p);
                write!(out, " {op} ").unwrap();
                r.write_operand(out, p + 1);
            }
            Expr::Not(e) => {
                out.push('!');
                e.write_operand(out, 8);
            }
            Expr::Paren(e) => {
                out.push('(');
                e.write(out);
                out.push(')');
            }
            Expr::Ternary(c, a, b) => {
                c.write_operand(out, 2);
                out.push_str(" ? ");
                a.write_operand(out, 2);
                out.push_str(" : ");
                b.write_operand(out, 1);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Expr(Expr),
    Assign(String, Expr),
    Local(&'static str, String, Expr),
    Return(Option<Expr>),
    Break,
    If { cond: Expr, then: Box<Stmt>, els: Option<Box<Stmt>> },
    Block(Vec<Stmt>),
    Switch { selector: Expr, cases: Vec<Case> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    /// `None` is the default label.
    pub label: Option<Expr>,
    pub body: Vec<Stmt>,
}

impl Stmt {
    pub fn call(f: &str, args: Vec<Expr>) -> Stmt {
        Stmt::Expr(Expr::call(f, args))
    }

    pub fn if_then(cond: Expr, then: Stmt) -> Stmt {
        Stmt::If { cond, then: Box::new(then), els: None }
    }

    pub fn if_else(cond: Expr, then: Stmt, els: Stmt) -> Stmt {
        Stmt::If { cond, then: Box::new(then), els: Some(Box::new(els)) }
    }

    fn write(&self, out: &mut String, indent: usize) {
        let pad = "    ".repeat(indent);
        match self {
            Stmt::Expr(e) => writeln!(out, "{pad}{};", e.render()).unwrap(),
            Stmt::Assign(n, e) => writeln!(out, "{pad}{n} = {};", e.render()).unwrap(),
            Stmt::Local(t, n, e) => writeln!(out, "{pad}{t} {n} = {};", e.render()).unwrap(),
            Stmt::Return(None) => writeln!(out, "{pad}return;").unwrap(),
            Stmt::Return(Some(e)) => writeln!(out, "{pad}return {};", e.render()).unwrap(),
            Stmt::Break => writeln!(out, "{pad}break;").unwrap(),
            Stmt::Block(items) => {
                writeln!(out, "{pad}{{").unwrap();
                for s in items {
                    s.write(out, indent + 1);
                }
                writeln!(out, "{pad}}}").unwrap();
            }
            Stmt::If { .. } => {
                out.push_str(&pad);
                self.write_if(out, indent);
            }
            Stmt::Switch { selector, cases } => {
                writeln!(out, "{pad}switch ({}) {{", selector.render()).unwrap();
                for c in cases {
                    match &c.label {
                        Some(l) => writeln!(out, "{pad}    case {}:", l.render()).unwrap(),
                        None => writeln!(out, "{pad}    default:").unwrap(),
                    }
                    for s in &c.body {
                        s.write(out, indent + 2);
                    }
                }
                writeln!(out, "{pad}}}").unwrap();
            }
        }
    }

    /// Writes an if statement whose leading indentation is already emitted.
    fn write_if(&self, out: &mut String, indent: usize) {
        let Stmt::If { cond, then, els } = self else { unreachable!() };
        let pad = "    ".repeat(indent);
        write!(out, "if ({})", cond.render()).unwrap();
        let then_block = matches!(**then, Stmt::Block(_));
        write_branch(out, then, indent);
        let Some(els) = els else { return };
        if then_block {
            out.pop();
            out.push_str(" else");
        } else {
            write!(out, "{pad}else").unwrap();
        }
        match &**els {
            Stmt::If { .. } => {
                out.push(' ');
                els.write_if(out, indent);
            }
            other => write_branch(out, other, indent),
        }
    }
}

fn write_branch(out: &mut String, branch: &Stmt, indent: usize) {
    match branch {
        Stmt::Block(items) => {
            out.push_str(" {\n");
            for s in items {
                s.write(out, indent + 1);
            }
            writeln!(out, "{}}}", "    ".repeat(indent)).unwrap();
        }
        other => {
            out.push('\n');
            other.write(out, indent + 1);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Method {
    pub ret: &'static str,
    pub name: String,
    pub params: Vec<(&'static str, String)>,
    pub body: Vec<Stmt>,
}

impl Method {
    /// Source text at the given indentation level, ending in a newline.
    pub fn render_at(&self, indent: usize) -> String {
        let pad = "    ".repeat(indent);
        let params: Vec<String> = self.params.iter().map(|(t, n)| format!("{t} {n}")).collect();
        let mut out = format!("{pad}{} {}({}) {{\n", self.ret, self.name, params.join(", "));
        for s in &self.body {
            s.write(&mut out, indent + 1);
        }
        writeln!(out, "{pad}}}").unwrap();
        out
    }

    pub fn render(&self) -> String {
        self.render_at(0)
    }
}

/// A class holding the given methods.
pub fn render_class(package: &str, name: &str, methods: &[Method]) -> String {
    let mut out = String::new();
    if !package.is_empty() {
        writeln!(out, "package {package};\n").unwrap();
    }
    writeln!(out, "public class {name} {{").unwrap();
    for (i, m) in methods.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&m.render_at(1));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_else_if_chain() {
        let m = Method {
            ret: "void",
            name: "f".into(),
            params: vec![("int", "a".into())],
            body: vec![Stmt::if_else(
                Expr::bin(Expr::name("a"), ">", Expr::Num(0)),
                Stmt::Block(vec![Stmt::call("x", vec![])]),
                Stmt::if_then(Expr::name("b"), Stmt::call("y", vec![])),
            )],
        };
        assert_eq!(
            m.render(),
            "void f(int a) {\n    if (a > 0) {\n        x();\n    } else if (b)\n        y();\n}\n"
        );
    }

    #[test]
    fn parenthesizes_by_precedence() {
        let e = Expr::bin(
            Expr::bin(Expr::name("a"), "||", Expr::name("b")),
            "&&",
            Expr::not(Expr::bin(Expr::name("c"), "<", Expr::Num(1))),
        );
        assert_eq!(e.render(), "(a || b) && !(c < 1)");
    }
}
