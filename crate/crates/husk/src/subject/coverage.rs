//! Baseline per-test coverage capture on an instrumented tree copy.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use husk_core::{CoverageModel, PerTestCoverage};

use crate::error::CampaignError;
use crate::subject::instrument::{parse_probe_dump, ProbeMap, COV_OUT_ENV};
use crate::subject::runner::{BuildOutcome, CargoRunner, SingleStatus, TestCase};

/// Coverage artifacts measured from one green baseline.
#[derive(Debug, Clone)]
pub struct BaselineCoverage {
    pub model: CoverageModel,
    pub per_test: PerTestCoverage,
    pub per_test_time: BTreeMap<String, Duration>,
    pub test_ids: Vec<String>,
}

const BUILD_TIMEOUT: Duration = Duration::from_secs(600);
const PER_TEST_TIMEOUT: Duration = Duration::from_secs(300);

/// Build the instrumented copy, run every test in its own process with a
/// probe dump, and fold the dumps into a coverage model. Every instrumented
/// line appears in the model, hit or not.
pub fn capture_baseline_coverage(
    instrumented_root: &Path,
    target_dir: &Path,
    probe_map: &ProbeMap,
    scratch: &Path,
) -> Result<BaselineCoverage, CampaignError> {
    let runner = CargoRunner::new(instrumented_root, target_dir);
    let binaries = match runner.build_tests(BUILD_TIMEOUT)? {
        BuildOutcome::Built(b) => b,
        BuildOutcome::Failed { diagnostics } => {
            return Err(CampaignError::InstrumentationFailure { diagnostics });
        }
    };
    let cases: Vec<TestCase> = runner.list_tests(&binaries)?;
    if cases.is_empty() {
        return Err(CampaignError::NoTestsFound);
    }

    let mut model = CoverageModel::new();
    for (file, lines) in &probe_map.lines {
        for line in lines {
            model.ensure_line(file, *line);
        }
    }

    fs::create_dir_all(scratch)?;
    let mut per_test = PerTestCoverage::new();
    let mut per_test_time = BTreeMap::new();
    for (idx, case) in cases.iter().enumerate() {
        let dump = scratch.join(format!("cov-{idx}.txt"));
        let _ = fs::remove_file(&dump);
        let run = runner.run_single(
            case,
            Instant::now() + PER_TEST_TIMEOUT,
            &[(COV_OUT_ENV.to_string(), dump.display().to_string())],
        )?;
        if run.status != SingleStatus::Passed {
            return Err(CampaignError::InstrumentationFailure {
                diagnostics: format!(
                    "test {} did not pass on the instrumented baseline:\n{}",
                    case.id, run.output
                ),
            });
        }
        per_test.record_test(&case.id);
        per_test_time.insert(case.id.clone(), run.wall_time);
        if let Ok(text) = fs::read_to_string(&dump) {
            for ((file, line), count) in parse_probe_dump(&text, probe_map) {
                model.add_hits(&file, line, count);
                per_test.record(&case.id, &file, line);
            }
        }
    }

    let test_ids = cases.iter().map(|c| c.id.clone()).collect();
    Ok(BaselineCoverage { model, per_test, per_test_time, test_ids })
}
