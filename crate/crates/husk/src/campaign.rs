//! Campaign orchestration: green-baseline verification, mutant scheduling,
//! apply/build/run/revert, and result classification.
//!
//! The user's tree is never built in place. Baseline verification and mutant
//! execution happen on disposable copies with isolated target directories;
//! parallel workers get fully independent copies and push results back by
//! index, so outcomes are identical to serial execution.

use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use husk_core::{
    classify_method, covering_tests, generate_mutants, select_tests, summarize,
    tag_assertion_free, CampaignConfig, CoverageModel, CoveringTestSource, ExtremeMutant,
    MethodClassification, MethodSite, MutantResult, PerTestCoverage, ReasonTag, ReportSummary,
    RunStatus, TestRunResult,
};

use crate::error::CampaignError;
use crate::subject::coverage::capture_baseline_coverage;
use crate::subject::discover::{discover_methods, DiscoveryConfig, DiscoverySnapshot};
use crate::subject::instrument::instrument_tree;
use crate::subject::patch::apply_mutation;
use crate::subject::runner::{BuildOutcome, CargoRunner, TestCase};
use crate::subject::tree::{copy_tree, tree_hash, Workspace};
use crate::testsrc;

const BASELINE_BUILD_TIMEOUT: Duration = Duration::from_secs(600);
const BASELINE_SUITE_TIMEOUT: Duration = Duration::from_secs(600);
const MIN_MUTANT_BUILD_TIMEOUT: Duration = Duration::from_secs(60);

/// The subject project and how to interpret its layout.
#[derive(Debug, Clone)]
pub struct SubjectOptions {
    pub root: PathBuf,
    pub discovery: DiscoveryConfig,
}

/// Campaign-level options beyond the core config.
#[derive(Debug, Clone)]
pub struct CampaignOptions {
    pub config: CampaignConfig,
    pub assertion_patterns: Vec<String>,
    /// Where baseline coverage caches live; `None` disables persistence.
    pub cache_dir: Option<PathBuf>,
    /// Reuse a cached baseline when the tree hash matches (focused mode).
    pub use_baseline_cache: bool,
    /// When coverage instrumentation fails, continue with every method
    /// considered covered (and every test selected) instead of aborting.
    /// Off by default: an aborted campaign is the safer answer.
    pub instrumentation_fallback: bool,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions {
            config: CampaignConfig::default(),
            assertion_patterns: husk_core::default_assertion_patterns(),
            cache_dir: None,
            use_baseline_cache: false,
            instrumentation_fallback: false,
        }
    }
}

/// Green-baseline artifacts used by mutant scheduling and reporting.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub model: CoverageModel,
    pub per_test: PerTestCoverage,
    pub per_test_time: BTreeMap<String, Duration>,
    pub test_ids: Vec<String>,
    pub suite_time: Duration,
    pub build_time: Duration,
    pub tree_hash: String,
    pub from_cache: bool,
    /// Set when coverage capture failed and the configured fallback kicked
    /// in; carries the instrumentation diagnostics.
    pub fallback: Option<String>,
}

/// Degenerate baseline: every discovered body line counts as covered and
/// every test covers everything, so selection reduces to the full suite.
fn fallback_baseline(
    snapshot: &DiscoverySnapshot,
    test_ids: Vec<String>,
    suite_time: Duration,
    build_time: Duration,
    diagnostics: &str,
) -> Baseline {
    let mut model = CoverageModel::new();
    for site in &snapshot.sites {
        for line in site.body_span.lines() {
            model.add_hits(&site.file, line, 1);
        }
    }
    let per_test = PerTestCoverage::full_suite_fallback(&test_ids, &model);
    Baseline {
        model,
        per_test,
        per_test_time: BTreeMap::new(),
        test_ids,
        suite_time,
        build_time,
        tree_hash: snapshot.tree_hash.clone(),
        from_cache: false,
        fallback: Some(diagnostics.to_string()),
    }
}

/// Everything one campaign produced.
#[derive(Debug)]
pub struct CampaignOutput {
    pub snapshot: DiscoverySnapshot,
    /// All discovered methods, coverage joined.
    pub methods: Vec<MethodSite>,
    /// The methods the campaign actually targeted (after filtering).
    pub selected: Vec<MethodSite>,
    pub mutants: Vec<ExtremeMutant>,
    pub results: Vec<MutantResult>,
    pub classifications: Vec<MethodClassification>,
    pub reason_tags: BTreeMap<String, ReasonTag>,
    pub summary: ReportSummary,
    pub baseline: Baseline,
    pub notes: Vec<String>,
}

/// Progress sink; one line per mutant goes to standard error by default.
pub trait Progress: Sync {
    fn message(&self, _text: &str) {}
    fn mutant_done(&self, _index: usize, _total: usize, _result: &MutantResult) {}
}

/// Prints campaign progress to standard error.
pub struct StderrProgress;

impl Progress for StderrProgress {
    fn message(&self, text: &str) {
        eprintln!("husk: {text}");
    }

    fn mutant_done(&self, index: usize, total: usize, result: &MutantResult) {
        eprintln!(
            "[{}/{}] {} {} ({:.1}s)",
            index + 1,
            total,
            result.mutant_id,
            match result.outcome {
                husk_core::Outcome::Killed => "killed",
                husk_core::Outcome::Survived => "SURVIVED",
                husk_core::Outcome::Invalid => "invalid",
            },
            result.wall_time.as_secs_f64(),
        );
    }
}

/// Swallows all progress.
pub struct SilentProgress;

impl Progress for SilentProgress {}

/// Verify the baseline is green and capture coverage artifacts.
///
/// Refuses with the failing test ids when the suite is red; surfaces
/// instrumentation problems verbatim.
pub fn verify_baseline(
    subject: &SubjectOptions,
    options: &CampaignOptions,
    snapshot: &DiscoverySnapshot,
    workspace: &Workspace,
    progress: &dyn Progress,
) -> Result<Baseline, CampaignError> {
    if options.use_baseline_cache {
        if let Some(cached) = load_cached_baseline(options.cache_dir.as_deref(), &snapshot.tree_hash) {
            progress.message("baseline coverage reused from cache (tree hash unchanged)");
            return Ok(cached);
        }
    }

    let main = workspace.path("main");
    copy_tree(&subject.root, &main)?;
    let runner = CargoRunner::new(&main, &workspace.path("target-main"));

    progress.message("building subject");
    let build_started = Instant::now();
    let binaries = match runner.build_tests(BASELINE_BUILD_TIMEOUT)? {
        BuildOutcome::Built(b) => b,
        BuildOutcome::Failed { diagnostics } => {
            return Err(CampaignError::BaselineRunError { diagnostics });
        }
    };
    let build_time = build_started.elapsed();
    if runner.list_tests(&binaries)?.is_empty() {
        return Err(CampaignError::NoTestsFound);
    }

    progress.message("verifying green baseline");
    let suite = runner.run_full_suite(BASELINE_SUITE_TIMEOUT)?;
    match suite.status {
        RunStatus::AllPassed => {}
        RunStatus::SomeFailed => {
            return Err(CampaignError::RedBaseline { failed: suite.failed_tests });
        }
        RunStatus::TimedOut => {
            return Err(CampaignError::BaselineRunError {
                diagnostics: "baseline suite timed out".to_string(),
            });
        }
        RunStatus::RunError => {
            return Err(CampaignError::BaselineRunError {
                diagnostics: suite.diagnostics.unwrap_or_default(),
            });
        }
    }

    progress.message("measuring per-test coverage");
    let cov = workspace.path("cov");
    copy_tree(&subject.root, &cov)?;
    let captured = instrument_tree(&cov, &subject.discovery).and_then(|probe_map| {
        capture_baseline_coverage(
            &cov,
            &workspace.path("target-cov"),
            &probe_map,
            &workspace.path("cov-dumps"),
        )
    });
    let baseline = match captured {
        Ok(captured) => Baseline {
            model: captured.model,
            per_test: captured.per_test,
            per_test_time: captured.per_test_time,
            test_ids: captured.test_ids,
            suite_time: suite.wall_time,
            build_time,
            tree_hash: snapshot.tree_hash.clone(),
            from_cache: false,
            fallback: None,
        },
        Err(CampaignError::InstrumentationFailure { diagnostics })
            if options.instrumentation_fallback =>
        {
            progress.message(
                "coverage instrumentation failed; continuing with all methods considered covered",
            );
            let test_ids = runner.list_tests(&binaries)?.into_iter().map(|c| c.id).collect();
            fallback_baseline(snapshot, test_ids, suite.wall_time, build_time, &diagnostics)
        }
        Err(err) => return Err(err),
    };
    if let Some(dir) = options.cache_dir.as_deref().filter(|_| baseline.fallback.is_none()) {
        if let Err(err) = store_cached_baseline(dir, &baseline) {
            progress.message(&format!("could not write baseline cache: {err}"));
        }
    }
    Ok(baseline)
}

/// Run the full campaign against the subject.
pub fn run_campaign(
    subject: &SubjectOptions,
    options: &CampaignOptions,
    progress: &dyn Progress,
) -> Result<CampaignOutput, CampaignError> {
    options
        .config
        .validate()
        .map_err(|e| CampaignError::Config(e.to_string()))?;

    let snapshot = discover_methods(&subject.root, &subject.discovery)?;
    let workspace = Workspace::create()?;
    let baseline = verify_baseline(subject, options, &snapshot, &workspace, progress)?;

    let mut notes: Vec<String> = Vec::new();
    for diag in &snapshot.diagnostics {
        notes.push(format!("file skipped during discovery: {} ({})", diag.file, diag.message));
    }
    if baseline.from_cache {
        notes.push("baseline coverage reused from cache".to_string());
    }
    if let Some(diagnostics) = &baseline.fallback {
        notes.push(format!(
            "coverage instrumentation failed; all methods considered covered (fallback). {}",
            diagnostics.lines().next().unwrap_or_default()
        ));
    }

    // Join baseline coverage onto the discovered sites.
    let methods: Vec<MethodSite> = snapshot
        .sites
        .iter()
        .map(|site| {
            let mut site = site.clone();
            site.covered_lines = baseline
                .model
                .covered_lines(&site.file)
                .into_iter()
                .filter(|line| site.body_span.contains_line(*line))
                .collect();
            site
        })
        .collect();

    let selected: Vec<MethodSite> = match &options.config.method_filter {
        Some(filter) if !filter.is_empty() => {
            methods.iter().filter(|m| filter.matches(m)).cloned().collect()
        }
        _ => methods.clone(),
    };

    let mutants = generate_mutants(&selected);
    progress.message(&format!(
        "{} methods selected, {} mutants generated",
        selected.len(),
        mutants.len()
    ));

    let results = execute_campaign(
        &subject.root,
        &snapshot,
        &selected,
        &mutants,
        &baseline,
        options,
        &workspace,
        progress,
        &mut notes,
    )?;

    // Fold results into per-method verdicts.
    let method_of: BTreeMap<&str, &str> = mutants
        .iter()
        .map(|m| (m.mutant_id.as_str(), m.method_id.as_str()))
        .collect();
    let mut by_method: BTreeMap<&str, Vec<&MutantResult>> = BTreeMap::new();
    for result in &results {
        if let Some(method_id) = method_of.get(result.mutant_id.as_str()) {
            by_method.entry(method_id).or_default().push(result);
        }
    }
    let mut classifications = Vec::with_capacity(selected.len());
    for site in &selected {
        let empty = Vec::new();
        let refs = by_method.get(site.id.as_str()).unwrap_or(&empty);
        let classification = classify_method(site, refs)
            .map_err(|e| CampaignError::Config(format!("internal classification error: {e}")))?;
        classifications.push(classification);
    }

    // Reason tags for pseudo-tested methods.
    let test_sources = testsrc::collect_test_sources(&subject.root, &baseline.test_ids);
    let mut covering: BTreeMap<String, Vec<CoveringTestSource>> = BTreeMap::new();
    for (classification, site) in classifications.iter().zip(&selected) {
        if classification.verdict != husk_core::Verdict::PseudoTested {
            continue;
        }
        let sources = covering_tests(site, &baseline.per_test)
            .into_iter()
            .map(|test_id| {
                let source = test_sources.get(&test_id).cloned().flatten();
                CoveringTestSource { test_id, source }
            })
            .collect();
        covering.insert(site.id.clone(), sources);
    }
    let reason_tags = tag_assertion_free(&classifications, &covering, &options.assertion_patterns);

    let summary = summarize(&selected, &classifications, &results);

    // The user's tree must be untouched by everything above.
    if tree_hash(&subject.root)? != snapshot.tree_hash {
        return Err(CampaignError::TreeChanged);
    }

    Ok(CampaignOutput {
        snapshot,
        methods,
        selected,
        mutants,
        results,
        classifications,
        reason_tags,
        summary,
        baseline,
        notes,
    })
}

/// Apply/build/run/revert every mutant; workers use independent tree copies.
#[allow(clippy::too_many_arguments)]
fn execute_campaign(
    original_root: &Path,
    snapshot: &DiscoverySnapshot,
    selected: &[MethodSite],
    mutants: &[ExtremeMutant],
    baseline: &Baseline,
    options: &CampaignOptions,
    workspace: &Workspace,
    progress: &dyn Progress,
    notes: &mut Vec<String>,
) -> Result<Vec<MutantResult>, CampaignError> {
    if mutants.is_empty() {
        return Ok(Vec::new());
    }
    let site_of: BTreeMap<&str, &MethodSite> =
        selected.iter().map(|s| (s.id.as_str(), s)).collect();

    let workers = options.config.parallelism.max(1) as usize;
    let queue: Mutex<VecDeque<(usize, &ExtremeMutant)>> =
        Mutex::new(mutants.iter().enumerate().collect());
    let slots: Mutex<Vec<Option<MutantResult>>> = Mutex::new(vec![None; mutants.len()]);
    let done = std::sync::atomic::AtomicUsize::new(0);
    let shared_notes: Mutex<Vec<String>> = Mutex::new(Vec::new());
    let total = mutants.len();

    std::thread::scope(|scope| -> Result<(), CampaignError> {
        let mut handles = Vec::new();
        let site_of = &site_of;
        for worker_index in 0..workers {
            let queue = &queue;
            let slots = &slots;
            let done = &done;
            let shared_notes = &shared_notes;
            handles.push(scope.spawn(move || -> Result<(), CampaignError> {
                let root = if worker_index == 0 {
                    workspace.path("main")
                } else {
                    workspace.path(&format!("worker-{worker_index}"))
                };
                if !root.is_dir() {
                    copy_tree(original_root, &root)?;
                }
                let target = if worker_index == 0 {
                    workspace.path("target-main")
                } else {
                    workspace.path(&format!("target-worker-{worker_index}"))
                };
                let runner = CargoRunner::new(&root, &target);

                // One pristine build per worker pins the test-case list.
                let build_timeout = mutant_build_timeout(options, baseline);
                let cases: Vec<TestCase> = match runner.build_tests(BASELINE_BUILD_TIMEOUT)? {
                    BuildOutcome::Built(b) => runner.list_tests(&b)?,
                    BuildOutcome::Failed { diagnostics } => {
                        return Err(CampaignError::BaselineRunError { diagnostics });
                    }
                };
                let case_of: BTreeMap<&str, &TestCase> =
                    cases.iter().map(|c| (c.id.as_str(), c)).collect();

                loop {
                    let Some((index, mutant)) = queue.lock().unwrap().pop_front() else {
                        return Ok(());
                    };
                    let result = run_one_mutant(
                        &runner,
                        &root,
                        snapshot,
                        site_of,
                        mutant,
                        baseline,
                        options,
                        build_timeout,
                        &case_of,
                        shared_notes,
                    );
                    let result = match result {
                        Ok(r) => r,
                        Err(e) => {
                            // Unexpected failure mid-mutant: the patch guard
                            // has already reverted; record and continue.
                            MutantResult {
                                mutant_id: mutant.mutant_id.clone(),
                                outcome: husk_core::Outcome::Invalid,
                                killed_by: Vec::new(),
                                executed_tests: 0,
                                wall_time: Duration::ZERO,
                                detail: husk_core::Detail::BuildFailure,
                                diagnostics: Some(format!("infrastructure error: {e}")),
                            }
                        }
                    };
                    let finished = done.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    progress.mutant_done(finished, total, &result);
                    slots.lock().unwrap()[index] = Some(result);
                }
            }));
        }
        for handle in handles {
            handle.join().expect("campaign worker panicked")?;
        }
        Ok(())
    })?;

    notes.extend(shared_notes.into_inner().unwrap());
    let results: Vec<MutantResult> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every mutant produces a result"))
        .collect();
    Ok(results)
}

fn mutant_build_timeout(options: &CampaignOptions, baseline: &Baseline) -> Duration {
    baseline
        .build_time
        .mul_f64(options.config.timeout_factor)
        .max(MIN_MUTANT_BUILD_TIMEOUT)
}

#[allow(clippy::too_many_arguments)]
fn run_one_mutant(
    runner: &CargoRunner,
    root: &Path,
    snapshot: &DiscoverySnapshot,
    site_of: &BTreeMap<&str, &MethodSite>,
    mutant: &ExtremeMutant,
    baseline: &Baseline,
    options: &CampaignOptions,
    build_timeout: Duration,
    case_of: &BTreeMap<&str, &TestCase>,
    notes: &Mutex<Vec<String>>,
) -> Result<MutantResult, CampaignError> {
    let started = Instant::now();
    let site = site_of
        .get(mutant.method_id.as_str())
        .ok_or_else(|| CampaignError::Config(format!("mutant {} has no site", mutant.mutant_id)))?;

    let selected_ids = select_tests(site, &baseline.per_test, options.config.test_selection);
    if selected_ids.is_empty() {
        notes.lock().unwrap().push(format!(
            "method {} is covered but no test selects it; coverage data inconsistent, mutant {} trivially survives",
            site.id, mutant.mutant_id
        ));
        return Ok(MutantResult {
            mutant_id: mutant.mutant_id.clone(),
            outcome: husk_core::Outcome::Survived,
            killed_by: Vec::new(),
            executed_tests: 0,
            wall_time: started.elapsed(),
            detail: husk_core::Detail::CleanPass,
            diagnostics: None,
        });
    }

    let subset_time: Duration = selected_ids
        .iter()
        .filter_map(|id| baseline.per_test_time.get(id).copied())
        .sum();
    let run_timeout = options.config.mutant_timeout(subset_time);

    let file_hash = snapshot.file_hashes.get(&site.file).ok_or_else(|| {
        CampaignError::Config(format!("no content hash recorded for {}", site.file))
    })?;

    let mut patch = match apply_mutation(
        root,
        &site.file,
        site.body_span,
        &mutant.variant.rendered_body,
        file_hash,
    ) {
        Ok(p) => p,
        Err(e) => {
            return Ok(MutantResult {
                mutant_id: mutant.mutant_id.clone(),
                outcome: husk_core::Outcome::Invalid,
                killed_by: Vec::new(),
                executed_tests: 0,
                wall_time: started.elapsed(),
                detail: husk_core::Detail::BuildFailure,
                diagnostics: Some(format!("patch refused: {e}")),
            });
        }
    };

    let build = runner.build_tests(build_timeout)?;
    let run: TestRunResult = match build {
        BuildOutcome::Failed { diagnostics } => TestRunResult {
            status: RunStatus::RunError,
            failed_tests: Vec::new(),
            executed_test_count: 0,
            wall_time: started.elapsed(),
            diagnostics: Some(diagnostics),
        },
        BuildOutcome::Built(_) => {
            let cases: Vec<TestCase> = selected_ids
                .iter()
                .filter_map(|id| case_of.get(id.as_str()).copied().cloned())
                .collect();
            if cases.len() != selected_ids.len() {
                notes.lock().unwrap().push(format!(
                    "some selected tests for {} were not found in the built binaries",
                    mutant.mutant_id
                ));
            }
            runner.run_selected(&cases, run_timeout)?
        }
    };

    patch
        .revert()
        .map_err(|e| CampaignError::Config(format!("revert failed: {e}")))?;

    let mut result = MutantResult::from_run(mutant.mutant_id.clone(), &run);
    result.wall_time = started.elapsed();
    Ok(result)
}

#[derive(Serialize, Deserialize)]
struct BaselineCacheFile {
    cache_version: u32,
    tree_hash: String,
    test_ids: Vec<String>,
    model: CoverageModel,
    per_test: PerTestCoverage,
    per_test_time_ms: BTreeMap<String, u64>,
    suite_time_ms: u64,
    build_time_ms: u64,
}

const CACHE_VERSION: u32 = 1;

fn cache_path(dir: &Path, tree_hash: &str) -> PathBuf {
    dir.join(format!("baseline-{tree_hash}.json"))
}

fn load_cached_baseline(dir: Option<&Path>, tree_hash: &str) -> Option<Baseline> {
    let path = cache_path(dir?, tree_hash);
    let text = fs::read_to_string(path).ok()?;
    let cached: BaselineCacheFile = serde_json::from_str(&text).ok()?;
    if cached.cache_version != CACHE_VERSION || cached.tree_hash != tree_hash {
        return None;
    }
    Some(Baseline {
        model: cached.model,
        per_test: cached.per_test,
        per_test_time: cached
            .per_test_time_ms
            .into_iter()
            .map(|(k, v)| (k, Duration::from_millis(v)))
            .collect(),
        test_ids: cached.test_ids,
        suite_time: Duration::from_millis(cached.suite_time_ms),
        build_time: Duration::from_millis(cached.build_time_ms),
        tree_hash: cached.tree_hash,
        from_cache: true,
        fallback: None,
    })
}

fn store_cached_baseline(dir: &Path, baseline: &Baseline) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let file = BaselineCacheFile {
        cache_version: CACHE_VERSION,
        tree_hash: baseline.tree_hash.clone(),
        test_ids: baseline.test_ids.clone(),
        model: baseline.model.clone(),
        per_test: baseline.per_test.clone(),
        per_test_time_ms: baseline
            .per_test_time
            .iter()
            .map(|(k, v)| (k.clone(), v.as_millis() as u64))
            .collect(),
        suite_time_ms: baseline.suite_time.as_millis() as u64,
        build_time_ms: baseline.build_time.as_millis() as u64,
    };
    let text = serde_json::to_string(&file)?;
    fs::write(cache_path(dir, &baseline.tree_hash), text)
}
