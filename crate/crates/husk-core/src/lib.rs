//! Core data model and pure algorithms for extreme mutation analysis.
//!
//! Everything in this crate is side-effect free: method metadata, the
//! replacement-variant catalog, mutant generation, outcome classification,
//! mutation-score and percentage arithmetic, LCOV parsing/emission, coverage
//! adjustment, test selection, and the annotated-report renderer. Process
//! execution, source patching, and file IO live in the companion `husk`
//! crate.
//!
//! The crate is `no_std` (with `alloc`) so the analysis layer can be embedded
//! anywhere; the test harness links `std` as usual.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod annotate;
pub mod classify;
pub mod config;
pub mod coverage;
pub mod method;
pub mod mutant;
pub mod percent;
pub mod run;
pub mod select;

pub use annotate::{render_report, AnnotatedSource, ReportInputs};
pub use classify::{
    classify_method, default_assertion_patterns, fmt_score, mutation_score, summarize,
    tag_assertion_free, ClassifyError, CoveringTestSource, MethodClassification, ReasonTag,
    ReportSummary, Verdict,
};
pub use config::{CampaignConfig, MethodFilter, TestSelection};
pub use coverage::{
    adjust_coverage, emit_lcov, parse_lcov, AdjustedCoverage, CoverageError, CoverageModel,
    LcovParseError,
};
pub use method::{Access, MethodSite, ReturnKind, Span};
pub use mutant::{generate_mutants, variants_for, ExtremeMutant, ReplacementVariant, VariantKind};
pub use percent::{fmt_percent, percent_round_half_up};
pub use run::{classify_outcome, Detail, MutantResult, Outcome, RunStatus, TestRunResult};
pub use select::{covering_tests, select_tests, PerTestCoverage};
