//! Integration tests for the subject adapter operations against real cargo
//! projects: test running, baseline verification, and coverage capture.

mod util;

use std::time::Duration;

use husk::campaign::{verify_baseline, CampaignOptions, SilentProgress, SubjectOptions};
use husk::error::CampaignError;
use husk::subject::discover::{discover_methods, DiscoveryConfig};
use husk::subject::runner::run_tests;
use husk::subject::tree::Workspace;
use husk_core::RunStatus;

use util::{copy_guinea, write_project};

fn baseline_for(root: &std::path::Path) -> Result<husk::campaign::Baseline, CampaignError> {
    let subject = SubjectOptions {
        root: root.to_path_buf(),
        discovery: DiscoveryConfig::default(),
    };
    let snapshot = discover_methods(root, &subject.discovery)?;
    let workspace = Workspace::create()?;
    verify_baseline(&subject, &CampaignOptions::default(), &snapshot, &workspace, &SilentProgress)
}

#[test]
fn green_fixture_runs_all_ten_tests() {
    let tmp = tempfile::tempdir().unwrap();
    let root = copy_guinea(tmp.path());
    let target = tmp.path().join("target");
    let result = run_tests(&root, &target, None, Duration::from_secs(300)).unwrap();
    assert_eq!(result.status, RunStatus::AllPassed);
    // 9 integration tests plus 1 unit test.
    assert_eq!(result.executed_test_count, 10);
    assert!(result.failed_tests.is_empty());
    assert!(result.wall_time > Duration::ZERO);
}

#[test]
fn empty_selection_executes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let root = copy_guinea(tmp.path());
    let target = tmp.path().join("target");
    let result = run_tests(&root, &target, Some(&[]), Duration::from_secs(60)).unwrap();
    assert_eq!(result.status, RunStatus::AllPassed);
    assert_eq!(result.executed_test_count, 0);
}

#[test]
fn selected_failing_test_is_reported_by_id() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("red");
    write_project(
        &root,
        "red",
        &[
            ("src/lib.rs", "pub fn answer() -> i64 { 41 }\n"),
            (
                "tests/it.rs",
                "#[test]\nfn t_wrong() { assert_eq!(red::answer(), 42); }\n#[test]\nfn t_fine() { assert!(red::answer() > 0); }\n",
            ),
        ],
    );
    let target = tmp.path().join("target");
    let selection = vec!["it::t_wrong".to_string()];
    let result = run_tests(&root, &target, Some(&selection), Duration::from_secs(300)).unwrap();
    assert_eq!(result.status, RunStatus::SomeFailed);
    assert_eq!(result.failed_tests, vec!["it::t_wrong".to_string()]);
    assert_eq!(result.executed_test_count, 1);
}

#[test]
fn build_failure_is_run_error_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("broken");
    write_project(&root, "broken", &[("src/lib.rs", "pub fn nope() -> i64 { \"str\" }\n")]);
    let target = tmp.path().join("target");
    let result = run_tests(&root, &target, None, Duration::from_secs(300)).unwrap();
    assert_eq!(result.status, RunStatus::RunError);
    let diag = result.diagnostics.unwrap();
    assert!(diag.contains("mismatched types") || diag.contains("error["), "diag: {diag}");
}

#[test]
fn hanging_test_times_out() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("hang");
    write_project(
        &root,
        "hang",
        &[
            ("src/lib.rs", "pub fn spin() { std::thread::sleep(std::time::Duration::from_secs(600)); }\n"),
            ("tests/it.rs", "#[test]\nfn t_hang() { hang::spin(); }\n"),
        ],
    );
    let target = tmp.path().join("target");
    // Prime the build so the timeout applies to the test run, not the build.
    let selection: Vec<String> = vec![];
    let _ = run_tests(&root, &target, Some(&selection), Duration::from_secs(300)).unwrap();
    let selection = vec!["it::t_hang".to_string()];
    let started = std::time::Instant::now();
    let result = run_tests(&root, &target, Some(&selection), Duration::from_secs(3)).unwrap();
    assert_eq!(result.status, RunStatus::TimedOut);
    assert!(started.elapsed() < Duration::from_secs(120));
}

#[test]
fn red_baseline_is_refused_with_failing_ids() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("red");
    write_project(
        &root,
        "red",
        &[
            ("src/lib.rs", "pub fn answer() -> i64 { 41 }\n"),
            ("tests/it.rs", "#[test]\nfn t_wrong() { assert_eq!(red::answer(), 42); }\n"),
        ],
    );
    match baseline_for(&root) {
        Err(CampaignError::RedBaseline { failed }) => {
            assert_eq!(failed, vec!["it::t_wrong".to_string()]);
        }
        other => panic!("expected red-baseline refusal, got {other:?}"),
    }
}

#[test]
fn project_without_tests_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("empty");
    write_project(&root, "empty", &[("src/lib.rs", "pub fn f() {}\n")]);
    match baseline_for(&root) {
        Err(CampaignError::NoTestsFound) => {}
        other => panic!("expected no-tests refusal, got {other:?}"),
    }
}

#[test]
fn instrumentation_failure_surfaces_as_run_error() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("collide");
    // The subject already defines __husk_cov without hit(); the injected
    // probe calls then fail to compile on the instrumented copy.
    write_project(
        &root,
        "collide",
        &[
            (
                "src/lib.rs",
                "pub mod __husk_cov {}\npub fn f() -> i64 { 1 }\n",
            ),
            ("tests/it.rs", "#[test]\nfn t() { assert_eq!(collide::f(), 1); }\n"),
        ],
    );
    match baseline_for(&root) {
        Err(CampaignError::InstrumentationFailure { diagnostics }) => {
            assert!(!diagnostics.is_empty());
        }
        other => panic!("expected instrumentation failure, got {other:?}"),
    }
}

#[test]
fn instrumentation_fallback_considers_all_methods_covered() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("collide");
    write_project(
        &root,
        "collide",
        &[
            ("src/lib.rs", "pub mod __husk_cov {}\npub fn f() -> i64 { 1 }\n"),
            ("tests/it.rs", "#[test]\nfn t() { assert_eq!(collide::f(), 1); }\n"),
        ],
    );
    let subject = SubjectOptions {
        root: root.clone(),
        discovery: DiscoveryConfig::default(),
    };
    let options = husk::campaign::CampaignOptions {
        instrumentation_fallback: true,
        ..Default::default()
    };
    let output = husk::campaign::run_campaign(&subject, &options, &SilentProgress).unwrap();
    assert!(output.baseline.fallback.is_some());
    assert!(output.notes.iter().any(|n| n.contains("fallback")));
    // f() is treated as covered: two integer mutants ran against the suite.
    assert_eq!(output.mutants.len(), 2);
    // return 1 is behaviorally equivalent here, so f is partially tested.
    let verdict = output
        .classifications
        .iter()
        .find(|c| c.method_id.ends_with("::f"))
        .unwrap()
        .verdict;
    assert_eq!(verdict, husk_core::Verdict::PartiallyTested);
}

#[test]
fn mutant_that_hangs_the_suite_is_killed_by_timeout() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("spin");
    write_project(
        &root,
        "spin",
        &[
            ("src/lib.rs", "pub fn keep_going(n: u32) -> bool {\n    n < 3\n}\n"),
            (
                "tests/it.rs",
                "#[test]\nfn t_loop() {\n    let mut i = 0;\n    while spin::keep_going(i) {\n        i += 1;\n    }\n    assert_eq!(i, 3);\n}\n",
            ),
        ],
    );
    let subject = SubjectOptions { root, discovery: DiscoveryConfig::default() };
    let mut options = husk::campaign::CampaignOptions::default();
    options.config.timeout_floor = Duration::from_secs(2);
    let output = husk::campaign::run_campaign(&subject, &options, &SilentProgress).unwrap();

    // return_true spins forever -> killed by timeout; return_false exits the
    // loop immediately -> killed by the count assertion.
    let by_id: std::collections::BTreeMap<&str, &husk_core::MutantResult> =
        output.results.iter().map(|r| (r.mutant_id.as_str(), r)).collect();
    let hung = by_id["src/lib.rs::keep_going#return_true"];
    assert_eq!(hung.outcome, husk_core::Outcome::Killed);
    assert_eq!(hung.detail, husk_core::Detail::Timeout);
    assert!(hung.killed_by.is_empty());
    let quick = by_id["src/lib.rs::keep_going#return_false"];
    assert_eq!(quick.outcome, husk_core::Outcome::Killed);
    assert_eq!(quick.detail, husk_core::Detail::TestFailure);
    assert_eq!(
        output.classifications[0].verdict,
        husk_core::Verdict::Tested
    );
}

#[test]
fn parallel_campaign_matches_serial_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    let root = copy_guinea(tmp.path());
    let serial = util::run_default_campaign(&root);

    let subject = SubjectOptions { root, discovery: DiscoveryConfig::default() };
    let mut options = husk::campaign::CampaignOptions::default();
    options.config.parallelism = 2;
    let parallel =
        husk::campaign::run_campaign(&subject, &options, &SilentProgress).unwrap();

    assert_eq!(util::result_fingerprint(&serial), util::result_fingerprint(&parallel));
    assert_eq!(serial.classifications, parallel.classifications);
}

#[test]
fn baseline_coverage_respects_per_test_granularity() {
    let tmp = tempfile::tempdir().unwrap();
    let root = copy_guinea(tmp.path());
    let baseline = baseline_for(&root).unwrap();

    // Per-test union equals the model's covered set.
    assert!(baseline.per_test.is_consistent_with(&baseline.model));
    assert_eq!(baseline.test_ids.len(), 10);

    let subject = SubjectOptions { root, discovery: DiscoveryConfig::default() };
    let snapshot = discover_methods(&subject.root, &subject.discovery).unwrap();

    // A method with zero hit lines is absent from every test's set.
    let session_count =
        snapshot.sites.iter().find(|s| s.name == "session_count").unwrap();
    for (test, covered) in &baseline.per_test.tests {
        let touches = covered
            .iter()
            .any(|(f, l)| *f == session_count.file && session_count.body_span.contains_line(*l));
        assert!(!touches, "uncovered method unexpectedly touched by {test}");
    }

    // A method exercised only by one test: its covered lines are a subset of
    // that test's coverage, and no other test touches it.
    let connect = snapshot.sites.iter().find(|s| s.name == "connect").unwrap();
    let mut covering = Vec::new();
    for (test, covered) in &baseline.per_test.tests {
        if covered.iter().any(|(f, l)| *f == connect.file && connect.body_span.contains_line(*l)) {
            covering.push(test.clone());
        }
    }
    assert_eq!(covering, vec!["it::t_pool_lifecycle".to_string()]);

    // The connect body's covered lines all appear in that test's set.
    let pool_cov = &baseline.per_test.tests["it::t_pool_lifecycle"];
    let covered_connect: Vec<u32> = baseline
        .model
        .covered_lines(&connect.file)
        .into_iter()
        .filter(|l| connect.body_span.contains_line(*l))
        .collect();
    assert!(!covered_connect.is_empty());
    for line in covered_connect {
        assert!(pool_cov.contains(&(connect.file.clone(), line)));
    }
}
