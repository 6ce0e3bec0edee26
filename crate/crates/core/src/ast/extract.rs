//! Locating the methods of a Java compilation unit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::java::{is_method, named_children, parse_java};

/// One method or constructor of a source file, with its text and position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSource {
    /// `pkg.Outer.Inner#name/arity(T1,T2)`, suffixed with `#n` for the n-th
    /// (n >= 2) declaration sharing the same signature.
    pub key: String,
    /// Qualified name of the declaring type.
    pub type_name: String,
    pub name: String,
    pub parameter_types: Vec<String>,
    /// Source text from the start of the declaration's first line (when only
    /// indentation precedes it) to the end of the declaration.
    pub text: String,
    /// 1-based file line of the text's first line.
    pub start_line: u32,
    pub end_line: u32,
}

/// Methods of a compilation unit in source order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FileMethods {
    pub methods: Vec<MethodSource>,
    /// The parser reported syntax errors somewhere in the file.
    pub has_errors: bool,
}

impl FileMethods {
    pub fn by_key(&self) -> BTreeMap<&str, &MethodSource> {
        self.methods.iter().map(|m| (m.key.as_str(), m)).collect()
    }
}

/// Finds every method and constructor with a body declared in a top-level
/// or member type. Methods of local and anonymous classes belong to their
/// enclosing method and are not listed; initializer blocks are skipped.
pub fn extract_methods(source: &str) -> FileMethods {
    let tree = parse_java(source);
    let root = tree.root_node();
    let src = source.as_bytes();
    let package = named_children(root)
        .find(|n| n.kind() == "package_declaration")
        .and_then(|p| named_children(p).find(|c| c.kind() != "annotation" && c.kind() != "marker_annotation"))
        .map(|n| compact(text(src, n)))
        .unwrap_or_default();
    let mut out = Vec::new();
    for decl in named_children(root) {
        visit_type(decl, &package, src, &mut out);
    }
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for m in &mut out {
        let n = seen.entry(m.key.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            m.key = format!("{}#{}", m.key, n);
        }
    }
    FileMethods { methods: out, has_errors: root.has_error() }
}

fn is_type_declaration(kind: &str) -> bool {
    matches!(
        kind,
        "class_declaration"
            | "interface_declaration"
            | "enum_declaration"
            | "record_declaration"
            | "annotation_type_declaration"
    )
}

fn visit_type(node: Node, outer: &str, src: &[u8], out: &mut Vec<MethodSource>) {
    if !is_type_declaration(node.kind()) {
        return;
    }
    let Some(name) = node.child_by_field_name("name") else { return };
    let simple = text(src, name);
    let qualified = if outer.is_empty() { simple.to_string() } else { format!("{outer}.{simple}") };
    let Some(body) = node.child_by_field_name("body") else { return };
    let mut members: Vec<Node> = named_children(body).collect();
    if let Some(extra) = members.iter().position(|m| m.kind() == "enum_body_declarations") {
        let decls = members.remove(extra);
        members.extend(named_children(decls));
    }
    for member in members {
        if is_method(member) {
            if let Some(m) = method_source(member, &qualified, simple, src) {
                out.push(m);
            }
        } else {
            visit_type(member, &qualified, src, out);
        }
    }
}

fn method_source(node: Node, type_name: &str, class: &str, src: &[u8]) -> Option<MethodSource> {
    node.child_by_field_name("body")?;
    let name = match node.kind() {
        "method_declaration" => text(src, node.child_by_field_name("name")?).to_string(),
        _ => class.to_string(),
    };
    let parameter_types: Vec<String> = node
        .child_by_field_name("parameters")
        .map(|ps| {
            named_children(ps)
                .filter_map(|p| match p.kind() {
                    "formal_parameter" => {
                        let ty = compact(text(src, p.child_by_field_name("type")?));
                        let dims = p.child_by_field_name("dimensions").map(|d| compact(text(src, d)));
                        Some(ty + &dims.unwrap_or_default())
                    }
                    "spread_parameter" => named_children(p)
                        .find(|c| c.kind() != "modifiers" && c.kind() != "variable_declarator")
                        .map(|t| compact(text(src, t)) + "..."),
                    _ => None,
                })
                .collect()
        })
        .unwrap_or_default();
    let line_start = src[..node.start_byte()].iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let lead = &src[line_start..node.start_byte()];
    let from = if lead.iter().all(|b| b.is_ascii_whitespace()) { line_start } else { node.start_byte() };
    let body_text = std::str::from_utf8(&src[from..node.end_byte()]).ok()?.to_string();
    let key = format!("{type_name}#{name}/{}({})", parameter_types.len(), parameter_types.join(","));
    Some(MethodSource {
        key,
        type_name: type_name.to_string(),
        name,
        parameter_types,
        text: body_text,
        start_line: node.start_position().row as u32 + 1,
        end_line: node.end_position().row as u32 + 1,
    })
}

fn text<'s>(src: &'s [u8], node: Node) -> &'s str {
    std::str::from_utf8(&src[node.byte_range()]).unwrap_or("")
}

fn compact(s: &str) -> String {
    s.split_whitespace().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_method_at;

    const FILE: &str = "package org.example;

import java.util.List;

public class Outer {
    private int x;

    public Outer(int x) {
        this.x = x;
    }

    static { init(); }

    int f(int a, List<String> b) {
        return a;
    }

    abstract void g();

    void f(String... rest) { }

    static class Inner {
        void h(int[] a, int b[]) {
            Runnable r = new Runnable() { public void run() { } };
        }
    }
}

enum Mode {
    ON, OFF;
    boolean on() { return this == ON; }
}
";

    #[test]
    fn finds_methods_and_constructors_with_keys() {
        let found = extract_methods(FILE);
        assert!(!found.has_errors);
        let keys: Vec<&str> = found.methods.iter().map(|m| m.key.as_str()).collect();
        assert_eq!(
            keys,
            [
                "org.example.Outer#Outer/1(int)",
                "org.example.Outer#f/2(int,List<String>)",
                "org.example.Outer#f/1(String...)",
                "org.example.Outer.Inner#h/2(int[],int[])",
                "org.example.Mode#on/0()",
            ]
        );
        let f = &found.methods[1];
        assert_eq!((f.start_line, f.end_line), (14, 16));
        assert_eq!(f.text, "    int f(int a, List<String> b) {\n        return a;\n    }");
    }

    #[test]
    fn method_text_parses_at_its_file_line() {
        for m in extract_methods(FILE).methods {
            let ast = parse_method_at(&m.text, m.start_line).unwrap();
            assert_eq!(ast.line_span(), (m.start_line, m.end_line), "{}", m.key);
        }
    }

    #[test]
    fn duplicate_signatures_are_numbered_in_source_order() {
        let src = "class A {\n  void f() { a(); }\n  void f() { b(); }\n}\n";
        let keys: Vec<String> = extract_methods(src).methods.into_iter().map(|m| m.key).collect();
        assert_eq!(keys, ["A#f/0()", "A#f/0()#2"]);
    }

    #[test]
    fn broken_files_still_yield_intact_methods() {
        let src = "class A {\n  void f() { a(); }\n  void g() { b( }\n}\n";
        let found = extract_methods(src);
        assert!(found.has_errors);
        assert!(found.methods.iter().any(|m| m.key == "A#f/0()"));
    }
}
