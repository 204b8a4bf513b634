//! Per-method verdicts, mutation score, and campaign summary tables.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::method::MethodSite;
use crate::mutant::VariantKind;
use crate::run::{MutantResult, Outcome};

/// Verdict for one method after all its mutants ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    /// Every valid extreme mutant was killed.
    Tested,
    /// At least one valid mutant was killed and at least one survived.
    PartiallyTested,
    /// Every valid mutant survived: the body can be removed unnoticed.
    PseudoTested,
    /// No baseline coverage, so no mutants were generated.
    Uncovered,
    /// Every generated mutant failed to build; excluded from the score.
    Unmutatable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Tested => "tested",
            Verdict::PartiallyTested => "partially_tested",
            Verdict::PseudoTested => "pseudo_tested",
            Verdict::Uncovered => "uncovered",
            Verdict::Unmutatable => "unmutatable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-method classification result.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MethodClassification {
    pub method_id: String,
    pub verdict: Verdict,
    pub surviving_variants: Vec<VariantKind>,
    pub killing_tests: BTreeSet<String>,
}

/// Reason tag attached to pseudo-tested methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ReasonTag {
    /// Every covering test is free of assertion idioms.
    NoAssertionSuspect,
    /// Needs human judgment (incomplete tests, side-effect methods, or the
    /// test source could not be inspected).
    InspectManually,
}

impl ReasonTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReasonTag::NoAssertionSuspect => "no-assertion-suspect",
            ReasonTag::InspectManually => "inspect-manually",
        }
    }
}

/// Programming errors surfaced by the classifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    /// A result was supplied whose mutant id does not belong to the method.
    ForeignResult { method_id: String, mutant_id: String },
    /// A covered method arrived with no results at all.
    MissingResults { method_id: String },
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::ForeignResult { method_id, mutant_id } => {
                write!(f, "result for foreign mutant {mutant_id} passed to method {method_id}")
            }
            ClassifyError::MissingResults { method_id } => {
                write!(f, "covered method {method_id} has no mutant results")
            }
        }
    }
}

/// Fold the results for one method's mutants into a verdict.
///
/// `results` must be exactly the results of the method's generated variants.
/// Invalid (build-failing) variants are ignored for the verdict; a method
/// whose variants are all invalid is `unmutatable`.
pub fn classify_method(
    method: &MethodSite,
    results: &[&MutantResult],
) -> Result<MethodClassification, ClassifyError> {
    for r in results {
        if !r.mutant_id.starts_with(method.id.as_str())
            || !r.mutant_id[method.id.len()..].starts_with('#')
        {
            return Err(ClassifyError::ForeignResult {
                method_id: method.id.clone(),
                mutant_id: r.mutant_id.clone(),
            });
        }
    }
    if results.is_empty() {
        if method.is_covered() {
            return Err(ClassifyError::MissingResults { method_id: method.id.clone() });
        }
        return Ok(MethodClassification {
            method_id: method.id.clone(),
            verdict: Verdict::Uncovered,
            surviving_variants: Vec::new(),
            killing_tests: BTreeSet::new(),
        });
    }

    let mut killed = 0usize;
    let mut survived = 0usize;
    let mut surviving_variants = Vec::new();
    let mut killing_tests = BTreeSet::new();
    for r in results {
        match r.outcome {
            Outcome::Killed => {
                killed += 1;
                killing_tests.extend(r.killed_by.iter().cloned());
            }
            Outcome::Survived => {
                survived += 1;
                if let Some(kind) = variant_kind_of(&r.mutant_id, &method.id) {
                    surviving_variants.push(kind);
                }
            }
            Outcome::Invalid => {}
        }
    }

    let verdict = if killed + survived == 0 {
        Verdict::Unmutatable
    } else if survived == 0 {
        Verdict::Tested
    } else if killed == 0 {
        Verdict::PseudoTested
    } else {
        Verdict::PartiallyTested
    };

    Ok(MethodClassification {
        method_id: method.id.clone(),
        verdict,
        surviving_variants,
        killing_tests,
    })
}

fn variant_kind_of(mutant_id: &str, method_id: &str) -> Option<VariantKind> {
    let suffix = mutant_id.strip_prefix(method_id)?.strip_prefix('#')?;
    [
        VariantKind::EmptyBody,
        VariantKind::ReturnTrue,
        VariantKind::ReturnFalse,
        VariantKind::ReturnZero,
        VariantKind::ReturnOne,
        VariantKind::ReturnEmptyString,
        VariantKind::ReturnConstantStringA,
        VariantKind::ReturnCharSpace,
        VariantKind::ReturnCharA,
        VariantKind::ReturnNullEquivalent,
    ]
    .into_iter()
    .find(|k| k.as_str() == suffix)
}

/// Mutation score: killed over all valid (killed + survived) mutants.
/// `None` when no valid mutant exists; render with [`fmt_score`].
pub fn mutation_score(results: &[MutantResult]) -> Option<f64> {
    let killed = results.iter().filter(|r| r.outcome == Outcome::Killed).count() as u64;
    let survived = results.iter().filter(|r| r.outcome == Outcome::Survived).count() as u64;
    if killed + survived == 0 {
        None
    } else {
        Some(killed as f64 / (killed + survived) as f64)
    }
}

/// Human rendering of the score for killed/total-valid counts.
pub fn fmt_score(killed: u64, total_valid: u64) -> String {
    crate::percent::fmt_percent(killed, total_valid)
}

/// Campaign-level summary: the score table plus the pseudo-tested
/// method/line accounting.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ReportSummary {
    /// Killed / total_valid in full precision; `None` when nothing is valid.
    pub score: Option<f64>,
    pub killed: u64,
    pub total_valid: u64,
    pub survived: u64,
    pub invalid: u64,
    pub mutator_kinds_used: u64,
    pub executed_tests_total: u64,
    pub wall_time_total: Duration,
    pub methods_total: u64,
    pub methods_pseudo: u64,
    pub methods_unmutatable: u64,
    pub lines_covered_pseudo: u64,
    pub lines_total_pseudo: u64,
}

impl ReportSummary {
    pub fn score_rendered(&self) -> String {
        fmt_score(self.killed, self.total_valid)
    }
}

/// Fill every summary field from one campaign's data.
pub fn summarize(
    methods: &[MethodSite],
    classifications: &[MethodClassification],
    results: &[MutantResult],
) -> ReportSummary {
    let killed = results.iter().filter(|r| r.outcome == Outcome::Killed).count() as u64;
    let survived = results.iter().filter(|r| r.outcome == Outcome::Survived).count() as u64;
    let invalid = results.iter().filter(|r| r.outcome == Outcome::Invalid).count() as u64;
    let mutator_kinds_used = results
        .iter()
        .filter_map(|r| {
            let hash = r.mutant_id.rfind('#')?;
            Some(r.mutant_id[hash + 1..].to_string())
        })
        .collect::<BTreeSet<_>>()
        .len() as u64;
    let executed_tests_total = results.iter().map(|r| r.executed_tests as u64).sum();
    let wall_time_total = results.iter().map(|r| r.wall_time).sum();

    let by_id: BTreeMap<&str, &MethodSite> =
        methods.iter().map(|m| (m.id.as_str(), m)).collect();
    let pseudo: Vec<&MethodClassification> = classifications
        .iter()
        .filter(|c| c.verdict == Verdict::PseudoTested)
        .collect();
    let lines_covered_pseudo = pseudo
        .iter()
        .filter_map(|c| by_id.get(c.method_id.as_str()))
        .map(|m| m.covered_lines.len() as u64)
        .sum();
    let lines_total_pseudo = pseudo
        .iter()
        .filter_map(|c| by_id.get(c.method_id.as_str()))
        .map(|m| u64::from(m.body_line_count))
        .sum();

    ReportSummary {
        score: mutation_score(results),
        killed,
        total_valid: killed + survived,
        survived,
        invalid,
        mutator_kinds_used,
        executed_tests_total,
        wall_time_total,
        methods_total: methods.len() as u64,
        methods_pseudo: pseudo.len() as u64,
        methods_unmutatable: classifications
            .iter()
            .filter(|c| c.verdict == Verdict::Unmutatable)
            .count() as u64,
        lines_covered_pseudo,
        lines_total_pseudo,
    }
}

/// Source text of one test that covers a pseudo-tested method. `source` is
/// `None` when the test body could not be located or read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringTestSource {
    pub test_id: String,
    pub source: Option<String>,
}

/// Tag pseudo-tested methods whose covering tests contain no assertion idiom.
///
/// `covering` maps each pseudo-tested method id to the sources of the tests
/// that cover it; `patterns` is the assertion vocabulary to look for. A
/// method is `no-assertion-suspect` only when every covering test was read
/// and none contains any pattern; anything requiring judgment (a pattern
/// found, an unreadable test, no covering tests at all) is
/// `inspect-manually`. Methods that are not pseudo-tested are absent from
/// the result.
pub fn tag_assertion_free(
    classifications: &[MethodClassification],
    covering: &BTreeMap<String, Vec<CoveringTestSource>>,
    patterns: &[String],
) -> BTreeMap<String, ReasonTag> {
    let mut tags = BTreeMap::new();
    for c in classifications {
        if c.verdict != Verdict::PseudoTested {
            continue;
        }
        let tag = match covering.get(&c.method_id) {
            Some(tests) if !tests.is_empty() => {
                let all_assertion_free = tests.iter().all(|t| match &t.source {
                    Some(src) => !patterns.iter().any(|p| src.contains(p.as_str())),
                    None => false,
                });
                if all_assertion_free {
                    ReasonTag::NoAssertionSuspect
                } else {
                    ReasonTag::InspectManually
                }
            }
            _ => ReasonTag::InspectManually,
        };
        tags.insert(c.method_id.clone(), tag);
    }
    tags
}

/// Default assertion vocabulary for Rust test code.
pub fn default_assertion_patterns() -> Vec<String> {
    [
        "assert!",
        "assert_eq!",
        "assert_ne!",
        "debug_assert!",
        "debug_assert_eq!",
        "debug_assert_ne!",
        "should_panic",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}
