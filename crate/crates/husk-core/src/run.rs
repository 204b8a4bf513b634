//! Test-run results and the mutant verdict mapping.

use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Aggregate outcome of one test execution (baseline or against a mutant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RunStatus {
    AllPassed,
    SomeFailed,
    TimedOut,
    /// The run never produced test results (typically a build failure).
    RunError,
}

/// Outcome of running tests once.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TestRunResult {
    pub status: RunStatus,
    pub failed_tests: Vec<String>,
    pub executed_test_count: u32,
    pub wall_time: Duration,
    /// Captured build/tool output when `status` is `RunError`.
    pub diagnostics: Option<String>,
}

impl TestRunResult {
    /// Checks the structural invariants (`some_failed` iff failures listed).
    pub fn is_consistent(&self) -> bool {
        let failed_matches = (self.status == RunStatus::SomeFailed) == !self.failed_tests.is_empty();
        failed_matches && self.executed_test_count as usize >= self.failed_tests.len()
    }
}

/// Verdict on one mutant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Outcome {
    Killed,
    Survived,
    Invalid,
}

/// Why the mutant got its outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Detail {
    TestFailure,
    Timeout,
    BuildFailure,
    CleanPass,
}

/// Map a test run against a mutant to its verdict.
///
/// A timeout counts as killed: a mutant that makes the suite hang is
/// detectably different from the original program. Build failures make the
/// mutant invalid and keep it out of the score denominator.
pub fn classify_outcome(run: &TestRunResult) -> (Outcome, Detail) {
    match run.status {
        RunStatus::SomeFailed => (Outcome::Killed, Detail::TestFailure),
        RunStatus::TimedOut => (Outcome::Killed, Detail::Timeout),
        RunStatus::AllPassed => (Outcome::Survived, Detail::CleanPass),
        RunStatus::RunError => (Outcome::Invalid, Detail::BuildFailure),
    }
}

/// Final record for one executed mutant.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MutantResult {
    pub mutant_id: String,
    pub outcome: Outcome,
    /// Test ids whose failure killed the mutant; empty unless `detail` is
    /// `test_failure`.
    pub killed_by: Vec<String>,
    pub executed_tests: u32,
    pub wall_time: Duration,
    pub detail: Detail,
    pub diagnostics: Option<String>,
}

impl MutantResult {
    /// Build a result from a run, enforcing the outcome/detail invariants.
    pub fn from_run(mutant_id: String, run: &TestRunResult) -> Self {
        let (outcome, detail) = classify_outcome(run);
        let killed_by = if detail == Detail::TestFailure {
            run.failed_tests.clone()
        } else {
            Vec::new()
        };
        MutantResult {
            mutant_id,
            outcome,
            killed_by,
            executed_tests: run.executed_test_count,
            wall_time: run.wall_time,
            detail,
            diagnostics: run.diagnostics.clone(),
        }
    }

    pub fn is_consistent(&self) -> bool {
        let pairing = match self.outcome {
            Outcome::Killed => matches!(self.detail, Detail::TestFailure | Detail::Timeout),
            Outcome::Survived => self.detail == Detail::CleanPass,
            Outcome::Invalid => self.detail == Detail::BuildFailure,
        };
        pairing && (!self.killed_by.is_empty()) == (self.detail == Detail::TestFailure)
    }
}
