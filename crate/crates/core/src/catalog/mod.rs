//! The conditional-related micro-change catalog and its detector.

mod rules;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{Ast, NodeId};
use crate::textdiff::project_action;
use crate::treediff::{ActionId, EditScript, Side};

pub use rules::detect_micro_changes;

/// Bumped whenever the catalog file layout changes.
pub const CATALOG_SCHEMA_VERSION: u32 = 1;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MicroChangeType {
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
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown micro-change type: {0}")]
pub struct UnknownType(pub String);

impl MicroChangeType {
    /// All types, in alphabetical order of their names.
    pub const ALL: [MicroChangeType; 20] = [
        MicroChangeType::AddConditionalStatement,
        MicroChangeType::AddConjunctOrDisjunct,
        MicroChangeType::AdjustConditionBoundary,
        MicroChangeType::ConditionalToBooleanReturn,
        MicroChangeType::ConditionalToExpression,
        MicroChangeType::ConditionalToSwitch,
        MicroChangeType::ExtendElseWithIf,
        MicroChangeType::ExtendIfWithElse,
        MicroChangeType::FlipLogicOperator,
        MicroChangeType::MoveInwardCondition,
        MicroChangeType::MoveOutwardCondition,
        MicroChangeType::RemoveConditionalStatement,
        MicroChangeType::RemoveConjunctOrDisjunct,
        MicroChangeType::RemoveElse,
        MicroChangeType::ReverseCondition,
        MicroChangeType::SwapThenAndElse,
        MicroChangeType::UnwrapStatementFromBlock,
        MicroChangeType::UnwrapStatementFromConditional,
        MicroChangeType::WrapStatementInBlock,
        MicroChangeType::WrapStatementInConditional,
    ];

    pub fn name(self) -> &'static str {
        use MicroChangeType::*;
        match self {
            AddConditionalStatement => "AddConditionalStatement",
            AddConjunctOrDisjunct => "AddConjunctOrDisjunct",
            AdjustConditionBoundary => "AdjustConditionBoundary",
            ConditionalToBooleanReturn => "ConditionalToBooleanReturn",
            ConditionalToExpression => "ConditionalToExpression",
            ConditionalToSwitch => "ConditionalToSwitch",
            ExtendElseWithIf => "ExtendElseWithIf",
            ExtendIfWithElse => "ExtendIfWithElse",
            FlipLogicOperator => "FlipLogicOperator",
            MoveInwardCondition => "MoveInwardCondition",
            MoveOutwardCondition => "MoveOutwardCondition",
            RemoveConditionalStatement => "RemoveConditionalStatement",
            RemoveConjunctOrDisjunct => "RemoveConjunctOrDisjunct",
            RemoveElse => "RemoveElse",
            ReverseCondition => "ReverseCondition",
            SwapThenAndElse => "SwapThenAndElse",
            UnwrapStatementFromBlock => "UnwrapStatementFromBlock",
            UnwrapStatementFromConditional => "UnwrapStatementFromConditional",
            WrapStatementInBlock => "WrapStatementInBlock",
            WrapStatementInConditional => "WrapStatementInConditional",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, UnknownType> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.name() == name)
            .ok_or_else(|| UnknownType(name.to_string()))
    }

    pub fn rule(self) -> RuleDescriptor {
        rule_of(self)
    }
}

impl fmt::Display for MicroChangeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MicroChangeType {
    type Err = UnknownType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_name(s)
    }
}

/// Documentation of one detection rule, as written to the catalog file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDescriptor {
    pub name: String,
    pub description: String,
    pub structure_template: String,
    pub rule_doc: String,
}

pub fn rule_of(ty: MicroChangeType) -> RuleDescriptor {
    let (description, structure_template, rule_doc) = rule_text(ty);
    RuleDescriptor {
        name: ty.name().to_string(),
        description: description.to_string(),
        structure_template: structure_template.to_string(),
        rule_doc: rule_doc.to_string(),
    }
}

/// String-based lookup for callers holding a type name.
pub fn rule_by_name(name: &str) -> Result<RuleDescriptor, UnknownType> {
    MicroChangeType::from_name(name).map(rule_of)
}

fn rule_text(ty: MicroChangeType) -> (&'static str, &'static str, &'static str) {
    use MicroChangeType::*;
    match ty {
        AddConditionalStatement => (
            "Add a new conditional statement.",
            "∅ → if ($c) $s",
            "INS of an IfStatement that has no inserted IfStatement ancestor, unless the same \
             if is claimed by WrapStatementInConditional or ExtendElseWithIf. Anchor: the \
             inserted if (post).",
        ),
        AddConjunctOrDisjunct => (
            "Modify an existing conditional statement by appending an additional condition using logical AND (&&) or logical OR (||) operators to refine or expand the criteria for the statement's execution.",
            "if ($c1) → if ($c1 && $c2) | if ($c1 || $c2)",
            "Inside cond(n) of a mapped IfStatement n: INS of an InfixExpression labelled && or || \
             with one operand that maps to a node of the old cond(n) (possibly under inserted \
             parentheses) and one operand whose root is inserted. Anchor: n (pre).",
        ),
        AdjustConditionBoundary => (
            "Modify a comparison operator in a conditional statement to alter its boundary condition.",
            "if ($a < $b) → if ($a <= $b)",
            "Inside cond(n) of a mapped IfStatement n: UPD of an InfixExpression label between two \
             of <, <=, >, >= that are not complements of each other, or between == and != \
             together with an UPD of a literal operand of the same expression. Anchor: n (pre).",
        ),
        ConditionalToBooleanReturn => (
            "Simplify a conditional statement that directly returns a boolean value by replacing the if statement with a direct return of the condition's evaluation.",
            "if ($c) return true; else return false; → return $c;",
            "DEL of IfStatement n whose branches return opposite boolean literals (the else may \
             be the statement right after n), and a post ReturnStatement whose expression, \
             ignoring parentheses and one !, maps to the guard of n with matching polarity. \
             Anchor: n (pre).",
        ),
        ConditionalToExpression => (
            "Simplify an if-else statement into a concise conditional operator.",
            "if ($c) $x = $a; else $x = $b; → $x = $c ? $a : $b;",
            "DEL of IfStatement n and INS of a ConditionalExpression whose guard, ignoring \
             parentheses, maps to the guard of n. Anchor: n (pre). The reverse direction is not \
             detected.",
        ),
        ConditionalToSwitch => (
            "Transform a series of if statements into a switch statement.",
            "if ($v == $k1) $s1 else if ($v == $k2) $s2 → switch ($v) { case $k1: $s1 case $k2: $s2 }",
            "INS of a SwitchStatement into which statements of at least two branches of deleted \
             IfStatements are mapped. Anchor: the first such if in pre-order (pre). The reverse \
             direction is not detected.",
        ),
        ExtendElseWithIf => (
            "Replace a simple else clause in an if-else statement with an else if condition, adding a new conditional check to the existing control flow for more specific action selection based on multiple conditions.",
            "if ($c1) $s1 else $s2 → if ($c1) $s1 else if ($c2) $s2",
            "INS of an IfStatement as the child of a mapped ElseClause of a mapped IfStatement n, \
             where the former child of the else clause is deleted or mapped into the new if. \
             Anchor: n (pre).",
        ),
        ExtendIfWithElse => (
            "Add an else clause to an existing if statement.",
            "if ($c) $s1 → if ($c) $s1 else $s2",
            "INS of an ElseClause under a mapped IfStatement n. Anchor: n (pre).",
        ),
        FlipLogicOperator => (
            "Alter the logical operator within a conditional statement, switching between AND (&&) and OR (||).",
            "if ($c1 && $c2) → if ($c1 || $c2)",
            "Inside cond(n) of a mapped IfStatement n: UPD of an InfixExpression label from && to \
             || or from || to &&. Anchor: n (pre).",
        ),
        MoveInwardCondition => (
            "Reorganize nested conditional statements by moving one of the conditions from an outer if statement to be combined with the condition of an inner if statement.",
            "if ($c1 && $c2) { if ($c3) $s } → if ($c1) { if ($c2 && $c3) $s }",
            "Mapped IfStatements outer and inner, inner nested in a branch of outer on both sides: \
             MOV of an operand of an && or || from cond(outer) into cond(inner). Anchor: outer \
             (pre).",
        ),
        MoveOutwardCondition => (
            "Reorganize nested conditional statements by moving one of the conditions from an inner if statement to be combined with the condition of an outer if statement.",
            "if ($c1) { if ($c2 && $c3) $s } → if ($c1 && $c2) { if ($c3) $s }",
            "Mapped IfStatements outer and inner, inner nested in a branch of outer on both sides: \
             MOV of an operand of an && or || from cond(inner) into cond(outer). Anchor: outer \
             (pre).",
        ),
        RemoveConditionalStatement => (
            "Remove an existing conditional statement.",
            "if ($c) $s → ∅",
            "DEL of an IfStatement that has no deleted IfStatement ancestor, unless the same if is \
             claimed by UnwrapStatementFromConditional, ConditionalToSwitch, \
             ConditionalToExpression or ConditionalToBooleanReturn. Anchor: the deleted if (pre).",
        ),
        RemoveConjunctOrDisjunct => (
            "Modify an existing conditional statement by removing conditions from a compound logical expression that concatenates multiple conditions by logical AND (&&) or logical OR (||).",
            "if ($c1 && $c2) | if ($c1 || $c2) → if ($c1)",
            "Inside cond(n) of a mapped IfStatement n: DEL of an InfixExpression labelled && or || \
             with one operand that maps into the new cond(n) (possibly under deleted \
             parentheses) and one operand whose root is deleted. Anchor: n (pre).",
        ),
        RemoveElse => (
            "Remove the else clause from an if-else statement, leaving only the if statement and its associated action.",
            "if ($c) $s1 else $s2 → if ($c) $s1",
            "DEL of an ElseClause under a mapped IfStatement n. Anchor: n (pre).",
        ),
        ReverseCondition => (
            "Invert the logic of a conditional expression within an if statement, changing the condition to its logical opposite.",
            "if ($c) → if (!$c)",
            "Inside cond(n) of a mapped IfStatement n: INS or DEL of a PrefixExpression ! whose \
             operand survives within the condition, or UPD of a comparison to its complement \
             (== and !=, < and >=, > and <=) that is not an AdjustConditionBoundary. \
             Anchor: n (pre).",
        ),
        SwapThenAndElse => (
            "Swap the actions of the then and else clauses of an if-else statement.",
            "if ($c) $s1 else $s2 → if ($c') $s2 else $s1",
            "Mapped IfStatement n with an else on both sides, where every mapped statement of \
             the old then branch lands in the new else branch and vice versa, at least one on \
             each side, with at least one MOV. Anchor: n (pre).",
        ),
        UnwrapStatementFromBlock => (
            "Remove the curly braces from a block containing a single statement following an if statement.",
            "if ($c) { $s } → if ($c) $s",
            "DEL of a Block in the then or else slot of a mapped IfStatement n whose only \
             statement maps to the content of the same slot after the change. Anchor: n (pre).",
        ),
        UnwrapStatementFromConditional => (
            "Remove the conditional check around a statement, so the statement executes unconditionally, independent of the previously specified condition.",
            "if ($c) $s → $s",
            "DEL of IfStatement n where a statement of one of its branches is mapped and, after \
             the change, is governed by the partner of n's former governing construct (the \
             nearest enclosing if, switch or conditional expression, or none). Not reported when \
             n is claimed by ConditionalToSwitch, ConditionalToExpression or \
             ConditionalToBooleanReturn. Anchor: n (pre).",
        ),
        WrapStatementInBlock => (
            "Enclose a single statement within curly braces following an if statement.",
            "if ($c) $s → if ($c) { $s }",
            "INS of a Block in the then or else slot of a mapped IfStatement n whose only \
             statement maps to the former content of the same slot. Anchor: n (pre).",
        ),
        WrapStatementInConditional => (
            "Wrap an existing statement, within an if statement.",
            "$s → if ($c) $s",
            "INS of IfStatement n where a statement of one of its branches is mapped and was \
             governed, before the change, by the partner of n's governing construct (or none). \
             Anchor: n (post).",
        ),
    }
}

/// The machine-readable catalog, one record per type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogFile {
    pub schema_version: u32,
    pub types: Vec<RuleDescriptor>,
    pub notes: Vec<String>,
}

pub fn catalog_file() -> CatalogFile {
    CatalogFile {
        schema_version: CATALOG_SCHEMA_VERSION,
        types: MicroChangeType::ALL.iter().map(|&t| rule_of(t)).collect(),
        notes: vec![
            "cond(n) is the ConditionExpr child of IfStatement n; mapped means the node has a \
             partner in the tree matching."
                .to_string(),
            "ConditionalToSwitch and ConditionalToExpression are detected in the if-to-switch and \
             if-to-ternary direction only."
                .to_string(),
            "Several rules may fire on the same actions; such compound micro-changes are all \
             reported."
                .to_string(),
        ],
    }
}

pub fn catalog_json() -> String {
    let mut s = serde_json::to_string_pretty(&catalog_file()).expect("catalog serializes");
    s.push('\n');
    s
}

/// Inclusive 1-based line interval.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineRange {
    pub start: u32,
    pub end: u32,
}

impl LineRange {
    fn covering(lines: impl IntoIterator<Item = u32>) -> Option<LineRange> {
        let mut it = lines.into_iter();
        let first = it.next()?;
        let (lo, hi) = it.fold((first, first), |(lo, hi), l| (lo.min(l), hi.max(l)));
        Some(LineRange { start: lo, end: hi })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Anchor {
    pub side: Side,
    pub id: NodeId,
    pub line_range: LineRange,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroChangeInstance {
    #[serde(rename = "type")]
    pub kind: MicroChangeType,
    pub anchor: Anchor,
    pub actions: Vec<ActionId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pre_location: Option<LineRange>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub post_location: Option<LineRange>,
}

impl MicroChangeInstance {
    pub(crate) fn build(
        kind: MicroChangeType,
        side: Side,
        id: NodeId,
        actions: Vec<ActionId>,
        script: &EditScript,
        pre: &Ast,
        post: &Ast,
    ) -> Self {
        let tree = match side {
            Side::Pre => pre,
            Side::Post => post,
        };
        let r = tree.range(id);
        let mut lines = crate::textdiff::LineSet::new();
        for a in &actions {
            if let Some(action) = script.get(*a) {
                lines.extend(&project_action(action, pre, post));
            }
        }
        MicroChangeInstance {
            kind,
            anchor: Anchor {
                side,
                id,
                line_range: LineRange { start: r.start_line, end: r.end_line },
            },
            actions,
            pre_location: LineRange::covering(lines.pre.iter().copied()),
            post_location: LineRange::covering(lines.post.iter().copied()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip_and_serialize_as_is() {
        for t in MicroChangeType::ALL {
            assert_eq!(MicroChangeType::from_name(t.name()), Ok(t));
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{}\"", t.name()));
        }
        let mut names: Vec<&str> = MicroChangeType::ALL.iter().map(|t| t.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 20);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert_eq!(rule_by_name("NotAType"), Err(UnknownType("NotAType".into())));
        assert!("reverseCondition".parse::<MicroChangeType>().is_err());
    }

    #[test]
    fn descriptors_carry_templates_and_descriptions() {
        let add = rule_of(MicroChangeType::AddConjunctOrDisjunct);
        assert_eq!(add.structure_template, "if ($c1) → if ($c1 && $c2) | if ($c1 || $c2)");
        let rev = rule_of(MicroChangeType::ReverseCondition);
        assert!(rev
            .description
            .starts_with("Invert the logic of a conditional expression within an if statement"));
        for t in MicroChangeType::ALL {
            let r = t.rule();
            assert_eq!(r.name, t.name());
            assert!(!r.description.is_empty() && !r.structure_template.is_empty());
            assert!(r.rule_doc.contains("Anchor"), "{t}");
        }
    }

    #[test]
    fn catalog_file_round_trips() {
        let back: CatalogFile = serde_json::from_str(&catalog_json()).unwrap();
        assert_eq!(back, catalog_file());
        assert_eq!(back.types.len(), 20);
    }
}
