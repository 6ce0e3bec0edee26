//! Normalized syntax trees for Java methods.
//!
//! Trees are stored as arenas in pre-order: a node's id is its pre-order
//! index, so the subtree rooted at `n` occupies the contiguous id range
//! `n..n + size(n)`. Rules and matchers are written against [`NodeKind`]
//! only, never against the parser's own node names.

mod extract;
mod java;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extract::{extract_methods, FileMethods, MethodSource};
pub use java::{parse_method, parse_method_at};

/// The closed vocabulary of node kinds.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    MethodDeclaration,
    Block,
    IfStatement,
    ElseClause,
    /// Guard slot of an if statement, including its parentheses.
    ConditionExpr,
    InfixExpression,
    PrefixExpression,
    ParenthesizedExpression,
    /// Ternary `c ? a : b`.
    ConditionalExpression,
    SwitchStatement,
    SwitchCase,
    ReturnStatement,
    BooleanLiteral,
    NumberLiteral,
    StringLiteral,
    CharLiteral,
    NullLiteral,
    SimpleName,
    QualifiedName,
    ThisExpression,
    MethodInvocation,
    Arguments,
    FieldAccess,
    Assignment,
    VariableDeclaration,
    ExpressionStatement,
    Type,
    Modifier,
    /// Standalone operator token, e.g. the `++` of an update expression.
    Operator,
    GenericStatement,
    GenericExpression,
}

impl NodeKind {
    pub const ALL: [NodeKind; 31] = [
        NodeKind::MethodDeclaration,
        NodeKind::Block,
        NodeKind::IfStatement,
        NodeKind::ElseClause,
        NodeKind::ConditionExpr,
        NodeKind::InfixExpression,
        NodeKind::PrefixExpression,
        NodeKind::ParenthesizedExpression,
        NodeKind::ConditionalExpression,
        NodeKind::SwitchStatement,
        NodeKind::SwitchCase,
        NodeKind::ReturnStatement,
        NodeKind::BooleanLiteral,
        NodeKind::NumberLiteral,
        NodeKind::StringLiteral,
        NodeKind::CharLiteral,
        NodeKind::NullLiteral,
        NodeKind::SimpleName,
        NodeKind::QualifiedName,
        NodeKind::ThisExpression,
        NodeKind::MethodInvocation,
        NodeKind::Arguments,
        NodeKind::FieldAccess,
        NodeKind::Assignment,
        NodeKind::VariableDeclaration,
        NodeKind::ExpressionStatement,
        NodeKind::Type,
        NodeKind::Modifier,
        NodeKind::Operator,
        NodeKind::GenericStatement,
        NodeKind::GenericExpression,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::MethodDeclaration => "MethodDeclaration",
            NodeKind::Block => "Block",
            NodeKind::IfStatement => "IfStatement",
            NodeKind::ElseClause => "ElseClause",
            NodeKind::ConditionExpr => "ConditionExpr",
            NodeKind::InfixExpression => "InfixExpression",
            NodeKind::PrefixExpression => "PrefixExpression",
            NodeKind::ParenthesizedExpression => "ParenthesizedExpression",
            NodeKind::ConditionalExpression => "ConditionalExpression",
            NodeKind::SwitchStatement => "SwitchStatement",
            NodeKind::SwitchCase => "SwitchCase",
            NodeKind::ReturnStatement => "ReturnStatement",
            NodeKind::BooleanLiteral => "BooleanLiteral",
            NodeKind::NumberLiteral => "NumberLiteral",
            NodeKind::StringLiteral => "StringLiteral",
            NodeKind::CharLiteral => "CharLiteral",
            NodeKind::NullLiteral => "NullLiteral",
            NodeKind::SimpleName => "SimpleName",
            NodeKind::QualifiedName => "QualifiedName",
            NodeKind::ThisExpression => "ThisExpression",
            NodeKind::MethodInvocation => "MethodInvocation",
            NodeKind::Arguments => "Arguments",
            NodeKind::FieldAccess => "FieldAccess",
            NodeKind::Assignment => "Assignment",
            NodeKind::VariableDeclaration => "VariableDeclaration",
            NodeKind::ExpressionStatement => "ExpressionStatement",
            NodeKind::Type => "Type",
            NodeKind::Modifier => "Modifier",
            NodeKind::Operator => "Operator",
            NodeKind::GenericStatement => "GenericStatement",
            NodeKind::GenericExpression => "GenericExpression",
        }
    }

    /// Kinds that occupy a statement slot (block member or branch body).
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Block
                | NodeKind::IfStatement
                | NodeKind::SwitchStatement
                | NodeKind::ReturnStatement
                | NodeKind::VariableDeclaration
                | NodeKind::ExpressionStatement
                | NodeKind::GenericStatement
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pre-order index of a node within its tree.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 1-based source coordinates; `end_col` is the column of the last character.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceRange {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceRange {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        SourceRange { start_line, start_col, end_line, end_col }
    }

    pub fn contains(&self, other: &SourceRange) -> bool {
        (self.start_line, self.start_col) <= (other.start_line, other.start_col)
            && (other.end_line, other.end_col) <= (self.end_line, self.end_col)
    }

    pub fn lines(&self) -> std::ops::RangeInclusive<u32> {
        self.start_line..=self.end_line
    }

    fn touches_line(&self, line: u32) -> bool {
        self.start_line <= line && line <= self.end_line
    }

    fn covers_span(&self, line: u32, first_col: u32, last_col: u32) -> bool {
        (self.start_line, self.start_col) <= (line, first_col)
            && (line, last_col) <= (self.end_line, self.end_col)
    }
}

impl fmt::Display for SourceRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{})-({},{})",
            self.start_line, self.start_col, self.end_line, self.end_col
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AstNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
    pub range: SourceRange,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AstError {
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: u32, column: u32, message: String },
    #[error("line {line} is outside the method ({first}..={last})")]
    OutOfRange { line: u32, first: u32, last: u32 },
}

/// An immutable syntax tree stored in pre-order.
#[derive(Clone, Debug)]
pub struct Ast {
    nodes: Vec<AstNode>,
    sizes: Vec<usize>,
    heights: Vec<usize>,
    hashes: Vec<u64>,
    /// First and last code column on each line, comments excluded.
    line_extents: BTreeMap<u32, (u32, u32)>,
}

impl Ast {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.0]
    }

    pub fn get(&self, id: NodeId) -> Option<&AstNode> {
        self.nodes.get(id.0)
    }

    pub fn nodes(&self) -> &[AstNode] {
        &self.nodes
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.0].kind
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id.0].label
    }

    pub fn range(&self, id: NodeId) -> SourceRange {
        self.nodes[id.0].range
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.0].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].children
    }

    pub fn child(&self, id: NodeId, index: usize) -> Option<NodeId> {
        self.nodes[id.0].children.get(index).copied()
    }

    /// Index of `id` among its parent's children.
    pub fn position(&self, id: NodeId) -> Option<usize> {
        let parent = self.parent(id)?;
        self.children(parent).iter().position(|&c| c == id)
    }

    /// Number of nodes in the subtree rooted at `id`, itself included.
    pub fn size(&self, id: NodeId) -> usize {
        self.sizes[id.0]
    }

    /// Leaves have height 1.
    pub fn height(&self, id: NodeId) -> usize {
        self.heights[id.0]
    }

    /// Structural hash over kind, label and children.
    pub fn subtree_hash(&self, id: NodeId) -> u64 {
        self.hashes[id.0]
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id.0].children.is_empty()
    }

    /// Strict descendants of `id` in pre-order.
    pub fn descendants(&self, id: NodeId) -> impl Iterator<Item = NodeId> {
        (id.0 + 1..id.0 + self.sizes[id.0]).map(NodeId)
    }

    /// `id` and its descendants in pre-order.
    pub fn subtree(&self, id: NodeId) -> impl Iterator<Item = NodeId> {
        (id.0..id.0 + self.sizes[id.0]).map(NodeId)
    }

    pub fn preorder(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn postorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = vec![(self.root(), false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
            } else {
                stack.push((id, true));
                for &c in self.children(id).iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// True if `desc` lies strictly below `anc`.
    pub fn is_descendant(&self, desc: NodeId, anc: NodeId) -> bool {
        anc.0 < desc.0 && desc.0 < anc.0 + self.sizes[anc.0]
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&p| self.parent(p))
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.ancestors(id).count()
    }

    /// Structural equality of two subtrees (kind, label, child order).
    pub fn isomorphic(&self, a: NodeId, other: &Ast, b: NodeId) -> bool {
        if self.hashes[a.0] != other.hashes[b.0] || self.sizes[a.0] != other.sizes[b.0] {
            return false;
        }
        self.subtree(a).zip(other.subtree(b)).all(|(x, y)| {
            let (nx, ny) = (self.node(x), other.node(y));
            nx.kind == ny.kind
                && nx.label == ny.label
                && nx.children.len() == ny.children.len()
        })
    }

    /// Isomorphism of whole trees.
    pub fn isomorphic_to(&self, other: &Ast) -> bool {
        match (self.is_empty(), other.is_empty()) {
            (true, true) => true,
            (false, false) => self.isomorphic(self.root(), other, other.root()),
            _ => false,
        }
    }

    /// First and last line covered by the tree.
    pub fn line_span(&self) -> (u32, u32) {
        let r = self.range(self.root());
        (r.start_line, r.end_line)
    }

    /// First and last code column of `line`, if it holds any code.
    pub fn line_extent(&self, line: u32) -> Option<(u32, u32)> {
        self.line_extents.get(&line).copied()
    }

    /// The most specific node covering all code on `line`. When several
    /// sibling nodes share the line, their lowest common ancestor is
    /// returned.
    pub fn node_at(&self, line: u32) -> Result<NodeId, AstError> {
        let (first, last) = self.line_span();
        if line < first || line > last {
            return Err(AstError::OutOfRange { line, first, last });
        }
        let extent = self.line_extent(line);
        let mut cur = self.root();
        loop {
            let mut touching = self
                .children(cur)
                .iter()
                .copied()
                .filter(|&c| self.range(c).touches_line(line));
            let (Some(only), None) = (touching.next(), touching.next()) else {
                return Ok(cur);
            };
            let covers = match extent {
                Some((c1, c2)) => self.range(only).covers_span(line, c1, c2),
                None => true,
            };
            if !covers {
                return Ok(cur);
            }
            cur = only;
        }
    }

    /// One node per line: `indent kind [label] (sl,sc)-(el,ec)`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for id in self.preorder() {
            let n = self.node(id);
            let indent = "  ".repeat(self.depth(id));
            if n.label.is_empty() {
                let _ = writeln!(out, "{indent}{} {}", n.kind, n.range);
            } else {
                let _ = writeln!(out, "{indent}{} [{}] {}", n.kind, n.label, n.range);
            }
        }
        out
    }
}

/// Builds an [`Ast`] by opening and closing nodes in pre-order.
#[derive(Default)]
pub struct AstBuilder {
    nodes: Vec<AstNode>,
    stack: Vec<NodeId>,
    line_extents: BTreeMap<u32, (u32, u32)>,
}

impl AstBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Opens a node as the next child of the currently open node.
    pub fn open(&mut self, kind: NodeKind, label: impl Into<String>, range: SourceRange) -> NodeId {
        let id = NodeId(self.nodes.len());
        let parent = self.stack.last().copied();
        if let Some(p) = parent {
            self.nodes[p.0].children.push(id);
        } else {
            assert!(self.nodes.is_empty(), "a tree has exactly one root");
        }
        self.nodes.push(AstNode {
            id,
            kind,
            label: label.into(),
            range,
            parent,
            children: Vec::new(),
        });
        self.stack.push(id);
        id
    }

    pub fn close(&mut self) {
        self.stack.pop().expect("close without open");
    }

    pub fn leaf(&mut self, kind: NodeKind, label: impl Into<String>, range: SourceRange) -> NodeId {
        let id = self.open(kind, label, range);
        self.close();
        id
    }

    /// Patches the range of an open or closed node.
    pub fn set_range(&mut self, id: NodeId, range: SourceRange) {
        self.nodes[id.0].range = range;
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    pub(crate) fn note_code(&mut self, line: u32, first_col: u32, last_col: u32) {
        let e = self.line_extents.entry(line).or_insert((first_col, last_col));
        e.0 = e.0.min(first_col);
        e.1 = e.1.max(last_col);
    }

    pub fn finish(self) -> Ast {
        assert!(self.stack.is_empty(), "unclosed nodes");
        let n = self.nodes.len();
        let mut sizes = vec![1usize; n];
        let mut heights = vec![1usize; n];
        let mut hashes = vec![0u64; n];
        // Reverse pre-order visits children before parents.
        for i in (0..n).rev() {
            let node = &self.nodes[i];
            let mut h = std::hash::DefaultHasher::new();
            node.kind.hash(&mut h);
            node.label.hash(&mut h);
            node.children.len().hash(&mut h);
            for c in &node.children {
                sizes[i] += sizes[c.0];
                heights[i] = heights[i].max(heights[c.0] + 1);
                hashes[c.0].hash(&mut h);
            }
            hashes[i] = h.finish();
        }
        Ast { nodes: self.nodes, sizes, heights, hashes, line_extents: self.line_extents }
    }
}
