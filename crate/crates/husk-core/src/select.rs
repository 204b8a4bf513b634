//! Per-test coverage and covering-test selection for mutant runs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::config::TestSelection;
use crate::coverage::CoverageModel;
use crate::method::MethodSite;

/// Which (file, line) pairs each test executed during the baseline run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PerTestCoverage {
    pub tests: BTreeMap<String, BTreeSet<(String, u32)>>,
}

impl PerTestCoverage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, test_id: &str, file: &str, line: u32) {
        self.tests
            .entry(test_id.to_string())
            .or_default()
            .insert((file.to_string(), line));
    }

    /// Registers a test that ran but touched no instrumented line.
    pub fn record_test(&mut self, test_id: &str) {
        self.tests.entry(test_id.to_string()).or_default();
    }

    pub fn test_ids(&self) -> Vec<String> {
        self.tests.keys().cloned().collect()
    }

    /// Union of all per-test covered sets.
    pub fn covered_union(&self) -> BTreeSet<(String, u32)> {
        let mut union = BTreeSet::new();
        for set in self.tests.values() {
            union.extend(set.iter().cloned());
        }
        union
    }

    /// The union over all tests must equal the model's covered set.
    pub fn is_consistent_with(&self, model: &CoverageModel) -> bool {
        let mut covered = BTreeSet::new();
        for (file, lines) in &model.files {
            for (line, hits) in lines {
                if *hits > 0 {
                    covered.insert((file.clone(), *line));
                }
            }
        }
        self.covered_union() == covered
    }

    /// Degenerate form: every test covers every covered line of the model.
    /// Used when per-test granularity is unavailable.
    pub fn full_suite_fallback(test_ids: &[String], model: &CoverageModel) -> Self {
        let mut out = Self::new();
        let mut covered = BTreeSet::new();
        for (file, lines) in &model.files {
            for (line, hits) in lines {
                if *hits > 0 {
                    covered.insert((file.clone(), *line));
                }
            }
        }
        for id in test_ids {
            out.tests.insert(id.clone(), covered.clone());
        }
        out
    }
}

/// Tests whose baseline coverage intersects the method's body lines.
/// Deterministic: sorted by test id.
pub fn covering_tests(site: &MethodSite, per_test: &PerTestCoverage) -> Vec<String> {
    per_test
        .tests
        .iter()
        .filter(|(_, covered)| {
            covered
                .iter()
                .any(|(file, line)| *file == site.file && site.body_span.contains_line(*line))
        })
        .map(|(id, _)| id.clone())
        .collect()
}

/// Tests to run against a mutant of `site`: the covering tests, or the whole
/// suite in full-suite mode. An empty result is legal and means the mutant
/// trivially survives (flagged upstream as a coverage inconsistency).
pub fn select_tests(
    site: &MethodSite,
    per_test: &PerTestCoverage,
    selection: TestSelection,
) -> Vec<String> {
    match selection {
        TestSelection::FullSuite => per_test.test_ids(),
        TestSelection::CoveringTests => covering_tests(site, per_test),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::method::{Access, ReturnKind, Span};
    use alloc::format;

    fn site(file: &str, first_line: u32, last_line: u32) -> MethodSite {
        MethodSite {
            id: "m".to_string(),
            file: file.to_string(),
            body_span: Span::new(0, 1, first_line, last_line),
            name: "m".to_string(),
            access: Access::Public,
            return_kind: ReturnKind::Void,
            body_line_count: last_line - first_line + 1,
            covered_lines: BTreeSet::new(),
        }
    }

    #[test]
    fn singleton_intersection() {
        let mut per_test = PerTestCoverage::new();
        per_test.record("it::t", "src/lib.rs", 5);
        per_test.record("it::other", "src/lib.rs", 50);
        let m = site("src/lib.rs", 4, 6);
        assert_eq!(
            select_tests(&m, &per_test, TestSelection::CoveringTests),
            ["it::t".to_string()]
        );
    }

    #[test]
    fn full_suite_mode_returns_everything() {
        let mut per_test = PerTestCoverage::new();
        per_test.record("b", "x.rs", 1);
        per_test.record("a", "y.rs", 9);
        let m = site("x.rs", 1, 1);
        assert_eq!(
            select_tests(&m, &per_test, TestSelection::FullSuite),
            ["a".to_string(), "b".to_string()]
        );
    }

    #[test]
    fn three_of_ten_tests_touch_the_method() {
        let mut per_test = PerTestCoverage::new();
        for i in 0..10 {
            let test = format!("it::t{i}");
            if i % 3 == 0 {
                // t0, t3, t6, t9 -- but t9 touches another file.
                let file = if i == 9 { "other.rs" } else { "src/lib.rs" };
                per_test.record(&test, file, 10 + i);
            } else {
                per_test.record(&test, "src/lib.rs", 90);
            }
        }
        let m = site("src/lib.rs", 10, 20);
        let selected = select_tests(&m, &per_test, TestSelection::CoveringTests);
        assert_eq!(selected, ["it::t0".to_string(), "it::t3".to_string(), "it::t6".to_string()]);
    }

    #[test]
    fn empty_selection_is_legal() {
        let per_test = PerTestCoverage::new();
        let m = site("src/lib.rs", 1, 2);
        assert!(select_tests(&m, &per_test, TestSelection::CoveringTests).is_empty());
    }

    #[test]
    fn union_consistency_with_model() {
        let mut per_test = PerTestCoverage::new();
        per_test.record("t1", "a.rs", 1);
        per_test.record("t2", "a.rs", 2);
        let mut model = CoverageModel::new();
        model.add_hits("a.rs", 1, 1);
        model.add_hits("a.rs", 2, 1);
        model.add_hits("a.rs", 3, 0);
        assert!(per_test.is_consistent_with(&model));
        model.add_hits("a.rs", 4, 2);
        assert!(!per_test.is_consistent_with(&model));
    }

    #[test]
    fn fallback_gives_every_test_every_covered_line() {
        let mut model = CoverageModel::new();
        model.add_hits("a.rs", 1, 1);
        model.add_hits("a.rs", 2, 0);
        let ids = ["x".to_string(), "y".to_string()];
        let fallback = PerTestCoverage::full_suite_fallback(&ids, &model);
        assert!(fallback.is_consistent_with(&model));
        assert_eq!(fallback.tests["x"], fallback.tests["y"]);
        assert_eq!(fallback.tests["x"].len(), 1);
    }
}
