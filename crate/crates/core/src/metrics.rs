//! Conditional-related lines, coverage ratios and micro-change frequencies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ast::{Ast, NodeId, NodeKind};
use crate::catalog::{MicroChangeInstance, MicroChangeType};
use crate::textdiff::LineSet;
use crate::treediff::Side;

/// Bumped whenever a persisted report layout changes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn is_conditional_related(ast: &Ast, n: NodeId) -> bool {
    let parent = ast.parent(n).map(|p| ast.kind(p));
    ast.kind(n) == NodeKind::IfStatement
        || parent == Some(NodeKind::IfStatement)
        // The else branch itself: the clause only wraps it.
        || parent == Some(NodeKind::ElseClause)
        || ast.kind(n) == NodeKind::ConditionExpr
        || ast.ancestors(n).any(|a| ast.kind(a) == NodeKind::ConditionExpr)
}

/// Lines changed both textually and structurally whose covering node is an
/// if statement, one of its direct children, or part of a condition.
pub fn conditional_related_lines(pre: &Ast, post: &Ast, diff_text: &LineSet, diff_tree: &LineSet) -> LineSet {
    let candidate = diff_text.intersection(diff_tree);
    let mut out = LineSet::new();
    for (side, ast) in [(Side::Pre, pre), (Side::Post, post)] {
        for &line in candidate.side(side) {
            if let Ok(n) = ast.node_at(line) {
                if is_conditional_related(ast, n) {
                    out.insert(side, line);
                }
            }
        }
    }
    out
}

/// Cardinalities behind the coverage ratios of one scope, both sides summed.
/// Sums over disjoint scopes equal the counts of their union.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageCounts {
    /// |CRC|
    pub crc: usize,
    /// |MC ∩ CRC|
    pub mc: usize,
    /// |Ref ∩ CRC|
    pub refactoring: usize,
    /// |(MC ∪ Ref) ∩ CRC|
    pub covered: usize,
}

impl CoverageCounts {
    pub fn new(mc: &LineSet, refactoring: &LineSet, crc: &LineSet) -> Self {
        CoverageCounts {
            crc: crc.len(),
            mc: mc.intersection(crc).len(),
            refactoring: refactoring.intersection(crc).len(),
            covered: mc.union(refactoring).intersection(crc).len(),
        }
    }

    pub fn add(&mut self, other: &CoverageCounts) {
        self.crc += other.crc;
        self.mc += other.mc;
        self.refactoring += other.refactoring;
        self.covered += other.covered;
    }

    pub fn ratios(&self) -> Coverage {
        if self.crc == 0 {
            return Coverage::default();
        }
        let d = self.crc as f64;
        Coverage {
            coverage: Some(self.covered as f64 / d),
            coverage_mc: Some(self.mc as f64 / d),
            coverage_rm: Some(self.refactoring as f64 / d),
        }
    }
}

/// The three coverage ratios; all `None` when the scope has no
/// conditional-related lines.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub coverage: Option<f64>,
    pub coverage_mc: Option<f64>,
    pub coverage_rm: Option<f64>,
}

impl Coverage {
    pub fn is_defined(&self) -> bool {
        self.coverage.is_some()
    }

    /// Range and bound checks; vacuously true when undefined.
    pub fn identities_hold(&self) -> bool {
        const EPS: f64 = 1e-12;
        match (self.coverage, self.coverage_mc, self.coverage_rm) {
            (None, None, None) => true,
            (Some(c), Some(m), Some(r)) => {
                let unit = |x: f64| (-EPS..=1.0 + EPS).contains(&x);
                unit(c) && unit(m) && unit(r) && c + EPS >= m.max(r) && c <= (m + r).min(1.0) + EPS
            }
            _ => false,
        }
    }
}

pub fn coverage(mc: &LineSet, refactoring: &LineSet, crc: &LineSet) -> Coverage {
    CoverageCounts::new(mc, refactoring, crc).ratios()
}

/// Unweighted mean of the defined coverages; `None` when there are none.
pub fn mean_coverage<'a>(scopes: impl IntoIterator<Item = &'a Coverage>) -> (Coverage, usize) {
    let (mut n, mut c, mut m, mut r) = (0usize, 0.0, 0.0, 0.0);
    for s in scopes {
        if let (Some(a), Some(b), Some(d)) = (s.coverage, s.coverage_mc, s.coverage_rm) {
            n += 1;
            c += a;
            m += b;
            r += d;
        }
    }
    if n == 0 {
        return (Coverage::default(), 0);
    }
    let k = n as f64;
    (Coverage { coverage: Some(c / k), coverage_mc: Some(m / k), coverage_rm: Some(r / k) }, n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEntry {
    pub micro_change: MicroChangeType,
    pub occurrences: usize,
    /// `None` when no instances were found at all.
    pub frequency: Option<f64>,
    /// 1-based position in the table.
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub total: usize,
    /// All catalog types, by descending count then name.
    pub entries: Vec<FrequencyEntry>,
}

impl FrequencyReport {
    pub fn from_counts(counts: &BTreeMap<MicroChangeType, usize>) -> Self {
        let total: usize = counts.values().sum();
        let mut rows: Vec<(MicroChangeType, usize)> =
            MicroChangeType::ALL.iter().map(|t| (*t, counts.get(t).copied().unwrap_or(0))).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.name().cmp(b.0.name())));
        let entries = rows
            .into_iter()
            .enumerate()
            .map(|(i, (t, n))| FrequencyEntry {
                micro_change: t,
                occurrences: n,
                frequency: (total > 0).then(|| n as f64 / total as f64),
                rank: i + 1,
            })
            .collect();
        FrequencyReport { total, entries }
    }

    /// Share of all instances taken by the `k` most frequent types.
    pub fn top_mass(&self, k: usize) -> Option<f64> {
        (self.total > 0).then(|| {
            self.entries.iter().take(k).map(|e| e.occurrences).sum::<usize>() as f64 / self.total as f64
        })
    }

    /// Ranks run 1..=n without gaps, counts never increase, frequencies sum
    /// to one when anything was found.
    pub fn is_well_formed(&self) -> bool {
        let ranks = self.entries.iter().enumerate().all(|(i, e)| e.rank == i + 1);
        let descending = self.entries.windows(2).all(|w| w[0].occurrences >= w[1].occurrences);
        let total = self.entries.iter().map(|e| e.occurrences).sum::<usize>() == self.total;
        let sum: f64 = self.entries.iter().filter_map(|e| e.frequency).sum();
        let freq = if self.total > 0 {
            (sum - 1.0).abs() <= 1e-9
        } else {
            self.entries.iter().all(|e| e.frequency.is_none())
        };
        ranks && descending && total && freq
    }

    /// Table columns: micro-change, occurrences, frequency, rank.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["micro-change", "occurrences", "frequency", "rank"])?;
        for e in &self.entries {
            let freq = e.frequency.map(|f| format!("{f:.6}")).unwrap_or_default();
            w.write_record([e.micro_change.name(), &e.occurrences.to_string(), &freq, &e.rank.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

pub fn frequency(instances: &[MicroChangeInstance]) -> FrequencyReport {
    let mut counts = BTreeMap::new();
    for i in instances {
        *counts.entry(i.kind).or_insert(0) += 1;
    }
    FrequencyReport::from_counts(&counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_method_at;
    use crate::textdiff::{line_diff, project_script_to_lines};
    use crate::treediff::{derive_edit_script, match_trees, MatchConfig};

    fn crc(pre: &str, post: &str) -> LineSet {
        let a = parse_method_at(pre, 1).unwrap();
        let b = parse_method_at(post, 1).unwrap();
        let m = match_trees(&a, &b, &MatchConfig::default());
        let s = derive_edit_script(&a, &b, &m).unwrap();
        let tree = project_script_to_lines(&s, &a, &b);
        let text = line_diff(pre, post);
        let out = conditional_related_lines(&a, &b, &text, &tree);
        assert!(out.is_subset(&text.intersection(&tree)));
        out
    }

    #[test]
    fn nested_then_statement_is_not_conditional_related() {
        let pre = "void f() {\n    if (a) {\n        while (b) {\n            x(1);\n        }\n    }\n}\n";
        let post = pre.replace("x(1)", "x(2)");
        assert!(crc(pre, &post).is_empty());
    }

    #[test]
    fn deep_conjunct_and_direct_branch_statements_count() {
        let pre = "void f() {\n    if (a\n        && (b || c)) {\n        x();\n    }\n}\n";
        let post = pre.replace("c)", "d)");
        assert_eq!(crc(pre, &post), LineSet::from_lines([3], [3]));
        let pre = "void f() {\n    if (a)\n        x(1);\n}\n";
        let post = pre.replace("x(1)", "x(2)");
        assert_eq!(crc(pre, &post), LineSet::from_lines([3], [3]));
    }

    #[test]
    fn whitespace_only_lines_are_excluded() {
        let pre = "void f() {\n    if (a && b) {\n        x();\n    }\n}\n";
        let post = pre.replace("a && b", "a  &&  b");
        assert!(crc(pre, &post).is_empty());
    }

    #[test]
    fn coverage_examples() {
        let crc = LineSet::from_lines(1..=5, 1..=5);
        let full = coverage(&crc, &LineSet::new(), &crc);
        assert_eq!(full.coverage_mc, Some(1.0));
        let mc = LineSet::from_lines(1..=5, []);
        let rf = LineSet::from_lines([], 1..=3);
        let c = coverage(&mc, &rf, &crc);
        assert_eq!((c.coverage, c.coverage_mc, c.coverage_rm), (Some(0.8), Some(0.5), Some(0.3)));
        assert!(c.identities_hold());
        let none = coverage(&mc, &rf, &LineSet::new());
        assert!(!none.is_defined() && none.identities_hold());
    }

    #[test]
    fn counts_add_like_disjoint_unions() {
        let crc1 = LineSet::from_lines([1, 2], [1]);
        let crc2 = LineSet::from_lines([10], [10, 11]);
        let mc = LineSet::from_lines([1, 10], []);
        let rf = LineSet::from_lines([1], [11]);
        let mut sum = CoverageCounts::new(&mc, &rf, &crc1);
        sum.add(&CoverageCounts::new(&mc, &rf, &crc2));
        assert_eq!(sum, CoverageCounts::new(&mc, &rf, &crc1.union(&crc2)));
    }

    #[test]
    fn mean_skips_undefined_scopes() {
        let a = Coverage { coverage: Some(1.0), coverage_mc: Some(0.5), coverage_rm: Some(0.5) };
        let b = Coverage { coverage: Some(0.5), coverage_mc: Some(0.5), coverage_rm: Some(0.0) };
        let (m, n) = mean_coverage([&a, &Coverage::default(), &b]);
        assert_eq!(n, 2);
        assert_eq!((m.coverage, m.coverage_mc, m.coverage_rm), (Some(0.75), Some(0.5), Some(0.25)));
        assert_eq!(mean_coverage([&Coverage::default()]), (Coverage::default(), 0));
    }

    #[test]
    fn frequency_tables() {
        let empty = frequency(&[]);
        assert_eq!(empty.total, 0);
        assert!(empty.entries.iter().all(|e| e.frequency.is_none()));
        assert!(empty.is_well_formed());

        let mut counts = BTreeMap::new();
        counts.insert(MicroChangeType::ReverseCondition, 1);
        let one = FrequencyReport::from_counts(&counts);
        assert_eq!(one.entries[0].micro_change, MicroChangeType::ReverseCondition);
        assert_eq!(one.entries[0].frequency, Some(1.0));
        assert!(one.entries[1..].iter().all(|e| e.frequency == Some(0.0)));

        counts.insert(MicroChangeType::WrapStatementInBlock, 3);
        counts.insert(MicroChangeType::AddConditionalStatement, 3);
        let r = FrequencyReport::from_counts(&counts);
        let order: Vec<_> = r.entries.iter().take(3).map(|e| (e.micro_change, e.rank)).collect();
        assert_eq!(
            order,
            [
                (MicroChangeType::AddConditionalStatement, 1),
                (MicroChangeType::WrapStatementInBlock, 2),
                (MicroChangeType::ReverseCondition, 3)
            ]
        );
        assert!(r.is_well_formed());
        assert_eq!(r.top_mass(2), Some(6.0 / 7.0));
    }

    #[test]
    fn csv_mirrors_table_columns() {
        let mut counts = BTreeMap::new();
        counts.insert(MicroChangeType::RemoveElse, 2);
        let csv = FrequencyReport::from_counts(&counts).to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("micro-change,occurrences,frequency,rank"));
        assert_eq!(lines.next(), Some("RemoveElse,2,1.000000,1"));
        assert_eq!(csv.lines().count(), 21);
    }
}
