//! Java front-end: tree-sitter parse trees re-mapped into [`NodeKind`]s.

use std::cell::RefCell;

use tree_sitter::{Node, Parser, Tree};

use super::{Ast, AstBuilder, AstError, NodeKind, SourceRange};

const WRAPPER_OPEN: &str = "class __MethodHolder__ {\n";
const WRAPPER_CLOSE: &str = "\n}\n";

thread_local! {
    static PARSER: RefCell<Parser> = RefCell::new(new_parser());
}

fn new_parser() -> Parser {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("bundled Java grammar is compatible");
    parser
}

/// Parses Java source with the thread's shared parser.
pub(crate) fn parse_java(source: &str) -> Tree {
    PARSER.with(|p| p.borrow_mut().parse(source, None).expect("parser has a language"))
}

/// Parses a single method or constructor declaration.
pub fn parse_method(source: &str) -> Result<Ast, AstError> {
    parse_method_at(source, 1)
}

/// Like [`parse_method`], numbering the first source line `first_line`.
pub fn parse_method_at(source: &str, first_line: u32) -> Result<Ast, AstError> {
    let wrapped = format!("{WRAPPER_OPEN}{source}{WRAPPER_CLOSE}");
    let tree = parse_java(&wrapped);
    // Row 1 of the wrapped text is the method's first line.
    let line_shift = first_line as i64 - 1;
    let to_error = |node: Node, message: &str| {
        let p = node.start_position();
        AstError::Parse {
            line: (p.row as i64 + line_shift).max(first_line as i64) as u32,
            column: p.column as u32 + 1,
            message: message.to_string(),
        }
    };
    let root = tree.root_node();
    if root.has_error() {
        let bad = first_error(root).unwrap_or(root);
        let msg = if bad.is_missing() {
            format!("missing `{}`", bad.kind())
        } else {
            "unexpected syntax".to_string()
        };
        return Err(to_error(bad, &msg));
    }
    let class = named_children(root)
        .find(|n| n.kind() == "class_declaration")
        .ok_or_else(|| to_error(root, "expected a method declaration"))?;
    let body = class
        .child_by_field_name("body")
        .ok_or_else(|| to_error(class, "expected a method declaration"))?;
    let members: Vec<Node> = named_children(body).filter(|n| !is_comment(*n)).collect();
    let method = match members.as_slice() {
        [m] if is_method(*m) && m.child_by_field_name("body").is_some() => *m,
        [] => return Err(to_error(body, "expected a method declaration")),
        [m] => return Err(to_error(*m, "expected a method declaration with a body")),
        [_, extra, ..] => return Err(to_error(*extra, "expected exactly one method declaration")),
    };
    Ok(convert_method(method, wrapped.as_bytes(), line_shift))
}

pub(crate) fn is_method(node: Node) -> bool {
    matches!(
        node.kind(),
        "method_declaration" | "constructor_declaration" | "compact_constructor_declaration"
    )
}

pub(crate) fn is_comment(node: Node) -> bool {
    matches!(node.kind(), "line_comment" | "block_comment")
}

pub(crate) fn named_children<'t>(node: Node<'t>) -> impl Iterator<Item = Node<'t>> {
    (0..node.named_child_count()).filter_map(move |i| node.named_child(i))
}

fn first_error(node: Node) -> Option<Node> {
    if node.is_error() || node.is_missing() {
        return Some(node);
    }
    if !node.has_error() {
        return None;
    }
    (0..node.child_count())
        .filter_map(|i| node.child(i))
        .find_map(first_error)
}

/// Converts a method node of an already parsed tree. Line numbers are
/// tree-sitter's 0-based rows plus `line_shift`.
pub(crate) fn convert_method(method: Node, source: &[u8], line_shift: i64) -> Ast {
    let mut conv = Converter { src: source, shift: line_shift, out: AstBuilder::new() };
    conv.note_tokens(method);
    conv.method(method);
    conv.out.finish()
}

struct Converter<'s> {
    src: &'s [u8],
    shift: i64,
    out: AstBuilder,
}

fn is_type(kind: &str) -> bool {
    kind.ends_with("_type")
        || matches!(
            kind,
            "type_identifier" | "type_arguments" | "type_parameters" | "dimensions" | "wildcard"
        )
}

fn is_number(kind: &str) -> bool {
    matches!(
        kind,
        "decimal_integer_literal"
            | "hex_integer_literal"
            | "octal_integer_literal"
            | "binary_integer_literal"
            | "decimal_floating_point_literal"
            | "hex_floating_point_literal"
    )
}

fn is_statement_kind(kind: &str) -> bool {
    kind.ends_with("_statement")
        || matches!(
            kind,
            "explicit_constructor_invocation"
                | "local_class_declaration"
                | "class_declaration"
                | "record_declaration"
                | "interface_declaration"
                | "enum_declaration"
                | ";"
        )
}

impl<'s> Converter<'s> {
    fn text(&self, node: Node) -> &'s str {
        std::str::from_utf8(&self.src[node.byte_range()]).unwrap_or("")
    }

    /// Leaf label: source text with whitespace runs collapsed.
    fn leaf_text(&self, node: Node) -> String {
        self.text(node).split_whitespace().collect::<Vec<_>>().join(" ")
    }

    fn line(&self, row: usize) -> u32 {
        (row as i64 + self.shift) as u32
    }

    fn range(&self, node: Node) -> SourceRange {
        self.span(node, node)
    }

    fn span(&self, first: Node, last: Node) -> SourceRange {
        let s = first.start_position();
        let e = last.end_position();
        SourceRange::new(self.line(s.row), s.column as u32 + 1, self.line(e.row), e.column as u32)
    }

    /// Records code extents for every non-comment token of the method.
    fn note_tokens(&mut self, node: Node) {
        if is_comment(node) {
            return;
        }
        if node.child_count() == 0 || node.kind() == "string_literal" || node.kind() == "text_block" {
            let s = node.start_position();
            let e = node.end_position();
            if e.row == s.row {
                if e.column > s.column {
                    self.out.note_code(self.line(s.row), s.column as u32 + 1, e.column as u32);
                }
            } else {
                let start_line_len = self.text(node).find('\n').unwrap_or(0) as u32;
                self.out.note_code(
                    self.line(s.row),
                    s.column as u32 + 1,
                    s.column as u32 + start_line_len.max(1),
                );
                if e.column > 0 {
                    self.out.note_code(self.line(e.row), 1, e.column as u32);
                }
            }
            return;
        }
        let mut cursor = node.walk();
        for child in node.children(&mut cursor) {
            self.note_tokens(child);
        }
    }

    fn leaf(&mut self, kind: NodeKind, node: Node) {
        let label = self.leaf_text(node);
        let r = self.range(node);
        self.out.leaf(kind, label, r);
    }

    fn method(&mut self, node: Node) {
        let r = self.range(node);
        self.out.open(NodeKind::MethodDeclaration, "", r);
        for child in named_children(node).filter(|c| !is_comment(*c)) {
            match child.kind() {
                "modifiers" => self.modifiers(child),
                "formal_parameters" => {
                    for p in named_children(child).filter(|c| !is_comment(*c)) {
                        self.parameter(p);
                    }
                }
                "identifier" => self.leaf(NodeKind::SimpleName, child),
                "throws" => self.leaf(NodeKind::GenericExpression, child),
                "block" | "constructor_body" => self.block(child),
                k if is_type(k) => self.leaf(NodeKind::Type, child),
                _ => self.expr(child),
            }
        }
        self.out.close();
    }

    fn modifiers(&mut self, node: Node) {
        let mut cursor = node.walk();
        for child in node.children(&mut cursor) {
            if is_comment(child) {
                continue;
            }
            if child.is_named() {
                self.leaf(NodeKind::GenericExpression, child);
            } else {
                self.leaf(NodeKind::Modifier, child);
            }
        }
    }

    fn parameter(&mut self, node: Node) {
        let r = self.range(node);
        self.out.open(NodeKind::VariableDeclaration, "", r);
        self.declaration_parts(node);
        self.out.close();
    }

    /// Flattens modifiers, type, declarators (name, dimensions, value).
    fn declaration_parts(&mut self, node: Node) {
        for child in named_children(node).filter(|c| !is_comment(*c)) {
            match child.kind() {
                "modifiers" => self.modifiers(child),
                "identifier" => self.leaf(NodeKind::SimpleName, child),
                "variable_declarator" => self.declaration_parts(child),
                k if is_type(k) => self.leaf(NodeKind::Type, child),
                _ => self.expr(child),
            }
        }
    }

    fn block(&mut self, node: Node) {
        let r = self.range(node);
        self.out.open(NodeKind::Block, "", r);
        for child in named_children(node).filter(|c| !is_comment(*c)) {
            self.stmt(child);
        }
        self.out.close();
    }

    fn stmt(&mut self, node: Node) {
        match node.kind() {
            "block" | "constructor_body" => self.block(node),
            "if_statement" => self.if_statement(node),
            "expression_statement" => self.wrap(NodeKind::ExpressionStatement, "", node),
            "local_variable_declaration" => {
                let r = self.range(node);
                self.out.open(NodeKind::VariableDeclaration, "", r);
                self.declaration_parts(node);
                self.out.close();
            }
            "return_statement" => self.wrap(NodeKind::ReturnStatement, "", node),
            "switch_expression" | "switch_statement" => self.switch(node),
            _ => self.generic(NodeKind::GenericStatement, node),
        }
    }

    fn if_statement(&mut self, node: Node) {
        let r = self.range(node);
        self.out.open(NodeKind::IfStatement, "", r);
        if let Some(cond) = node.child_by_field_name("condition") {
            let r = self.range(cond);
            self.out.open(NodeKind::ConditionExpr, "", r);
            match unparenthesize(cond) {
                Some(inner) => self.expr(inner),
                None => self.expr(cond),
            }
            self.out.close();
        }
        if let Some(then) = node.child_by_field_name("consequence") {
            self.stmt(then);
        }
        if let Some(alt) = node.child_by_field_name("alternative") {
            let mut cursor = node.walk();
            let else_kw = node
                .children(&mut cursor)
                .find(|c| c.kind() == "else")
                .unwrap_or(alt);
            let r = self.span(else_kw, alt);
            self.out.open(NodeKind::ElseClause, "", r);
            self.stmt(alt);
            self.out.close();
        }
        self.out.close();
    }

    fn switch(&mut self, node: Node) {
        let r = self.range(node);
        self.out.open(NodeKind::SwitchStatement, "", r);
        if let Some(sel) = node.child_by_field_name("condition") {
            match unparenthesize(sel) {
                Some(inner) => self.expr(inner),
                None => self.expr(sel),
            }
        }
        if let Some(body) = node.child_by_field_name("body") {
            for group in named_children(body).filter(|c| !is_comment(*c)) {
                self.switch_case(group);
            }
        }
        self.out.close();
    }

    fn switch_case(&mut self, group: Node) {
        let parts: Vec<Node> = named_children(group).filter(|c| !is_comment(*c)).collect();
        let is_default = parts.iter().any(|p| {
            p.kind() == "switch_label" && {
                let mut c = p.walk();
                let found = p.children(&mut c).any(|t| t.kind() == "default");
                found
            }
        });
        let r = self.range(group);
        self.out.open(NodeKind::SwitchCase, if is_default { "default" } else { "case" }, r);
        for part in parts {
            if part.kind() == "switch_label" {
                for e in named_children(part).filter(|c| !is_comment(*c)) {
                    self.expr(e);
                }
            } else {
                self.stmt(part);
            }
        }
        self.out.close();
    }

    /// Node with one expression child per named child.
    fn wrap(&mut self, kind: NodeKind, label: &str, node: Node) {
        let r = self.range(node);
        self.out.open(kind, label, r);
        for child in named_children(node).filter(|c| !is_comment(*c)) {
            self.expr(child);
        }
        self.out.close();
    }

    fn generic(&mut self, kind: NodeKind, node: Node) {
        let children: Vec<Node> = named_children(node).filter(|c| !is_comment(*c)).collect();
        if children.is_empty() {
            self.leaf(kind, node);
            return;
        }
        let r = self.range(node);
        self.out.open(kind, node.kind(), r);
        for child in children {
            if is_statement_kind(child.kind()) || child.kind() == "block" {
                self.stmt(child);
            } else {
                self.expr(child);
            }
        }
        self.out.close();
    }

    fn operator_of(&self, node: Node) -> String {
        node.child_by_field_name("operator")
            .map(|op| self.text(op).to_string())
            .unwrap_or_default()
    }

    fn expr(&mut self, node: Node) {
        let kind = node.kind();
        match kind {
            "binary_expression" => {
                let op = self.operator_of(node);
                self.wrap(NodeKind::InfixExpression, &op, node);
            }
            "unary_expression" => {
                let op = self.operator_of(node);
                self.wrap(NodeKind::PrefixExpression, &op, node);
            }
            "update_expression" => {
                let r = self.range(node);
                self.out.open(NodeKind::GenericExpression, "update_expression", r);
                let mut cursor = node.walk();
                for child in node.children(&mut cursor) {
                    if is_comment(child) {
                        continue;
                    }
                    if child.is_named() {
                        self.expr(child);
                    } else {
                        self.leaf(NodeKind::Operator, child);
                    }
                }
                self.out.close();
            }
            "parenthesized_expression" => self.wrap(NodeKind::ParenthesizedExpression, "", node),
            "ternary_expression" => self.wrap(NodeKind::ConditionalExpression, "", node),
            "assignment_expression" => {
                let op = self.operator_of(node);
                self.wrap(NodeKind::Assignment, &op, node);
            }
            "method_invocation" => {
                let r = self.range(node);
                self.out.open(NodeKind::MethodInvocation, "", r);
                for child in named_children(node).filter(|c| !is_comment(*c)) {
                    match child.kind() {
                        "identifier" if node.child_by_field_name("name") == Some(child) => {
                            self.leaf(NodeKind::SimpleName, child)
                        }
                        _ => self.expr(child),
                    }
                }
                self.out.close();
            }
            "argument_list" => self.wrap(NodeKind::Arguments, "", node),
            "field_access" => {
                if is_name_chain(node) {
                    let label: String = self.text(node).split_whitespace().collect();
                    let r = self.range(node);
                    self.out.leaf(NodeKind::QualifiedName, label, r);
                } else {
                    let r = self.range(node);
                    self.out.open(NodeKind::FieldAccess, "", r);
                    for child in named_children(node).filter(|c| !is_comment(*c)) {
                        if node.child_by_field_name("field") == Some(child) {
                            self.leaf(NodeKind::SimpleName, child);
                        } else {
                            self.expr(child);
                        }
                    }
                    self.out.close();
                }
            }
            "scoped_identifier" => {
                let label: String = self.text(node).split_whitespace().collect();
                let r = self.range(node);
                self.out.leaf(NodeKind::QualifiedName, label, r);
            }
            "identifier" => self.leaf(NodeKind::SimpleName, node),
            "this" => self.leaf(NodeKind::ThisExpression, node),
            "true" | "false" => self.leaf(NodeKind::BooleanLiteral, node),
            "null_literal" => self.leaf(NodeKind::NullLiteral, node),
            "character_literal" => self.leaf(NodeKind::CharLiteral, node),
            "string_literal" | "text_block" => {
                let r = self.range(node);
                self.out.leaf(NodeKind::StringLiteral, self.text(node), r);
            }
            k if is_number(k) => self.leaf(NodeKind::NumberLiteral, node),
            k if is_type(k) => self.leaf(NodeKind::Type, node),
            "block" => self.block(node),
            "switch_expression" => self.switch(node),
            "local_variable_declaration" | "formal_parameter" | "catch_formal_parameter"
            | "spread_parameter" | "resource" => {
                let r = self.range(node);
                self.out.open(NodeKind::VariableDeclaration, "", r);
                self.declaration_parts(node);
                self.out.close();
            }
            "modifiers" => {
                let r = self.range(node);
                self.out.open(NodeKind::GenericExpression, "modifiers", r);
                self.modifiers(node);
                self.out.close();
            }
            k if is_statement_kind(k) => self.stmt(node),
            _ => self.generic(NodeKind::GenericExpression, node),
        }
    }
}

fn unparenthesize(node: Node) -> Option<Node> {
    if node.kind() != "parenthesized_expression" {
        return None;
    }
    named_children(node).find(|c| !is_comment(*c))
}

/// `a.b.c` where every segment is a plain identifier.
fn is_name_chain(node: Node) -> bool {
    match node.kind() {
        "identifier" => true,
        "field_access" => {
            let object_ok = node.child_by_field_name("object").is_some_and(is_name_chain);
            let field_ok = node
                .child_by_field_name("field")
                .is_some_and(|f| f.kind() == "identifier");
            object_ok && field_ok
        }
        _ => false,
    }
}
