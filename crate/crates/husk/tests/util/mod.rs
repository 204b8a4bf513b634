//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)] // each test binary uses a different subset

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use husk::campaign::{CampaignOptions, CampaignOutput, SilentProgress, SubjectOptions};
use husk::subject::discover::DiscoveryConfig;
use husk_core::Verdict;

/// Workspace root (the repo), two levels above this crate's manifest.
pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).ancestors().nth(2).unwrap().to_path_buf()
}

pub fn guinea_source() -> PathBuf {
    workspace_root().join("testdata/guinea")
}

pub fn lcov_fixture_dir() -> PathBuf {
    workspace_root().join("testdata/lcov")
}

/// Copy the guinea fixture into a fresh temp dir.
pub fn copy_guinea(tmp: &Path) -> PathBuf {
    let dst = tmp.join("guinea");
    husk::subject::tree::copy_tree(&guinea_source(), &dst).unwrap();
    dst
}

/// Materialize an ad-hoc cargo project from (path, content) pairs.
pub fn write_project(root: &Path, name: &str, files: &[(&str, &str)]) {
    fs::create_dir_all(root).unwrap();
    fs::write(
        root.join("Cargo.toml"),
        format!(
            "[package]\nname = \"{name}\"\nversion = \"0.1.0\"\nedition = \"2021\"\n\n[workspace]\n"
        ),
    )
    .unwrap();
    for (rel, content) in files {
        let path = root.join(rel);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, content).unwrap();
    }
}

/// Run a full serial campaign with defaults against `root`.
pub fn run_default_campaign(root: &Path) -> CampaignOutput {
    let subject = SubjectOptions { root: root.to_path_buf(), discovery: DiscoveryConfig::default() };
    let options = CampaignOptions::default();
    husk::campaign::run_campaign(&subject, &options, &SilentProgress).unwrap()
}

/// Map method name (or full id) -> verdict for easy assertions.
pub fn verdicts_by_id(output: &CampaignOutput) -> BTreeMap<String, Verdict> {
    output
        .classifications
        .iter()
        .map(|c| (c.method_id.clone(), c.verdict))
        .collect()
}

/// Outcome fingerprint of a campaign with timing stripped, for
/// determinism comparisons.
pub fn result_fingerprint(output: &CampaignOutput) -> Vec<(String, String, Vec<String>, u32)> {
    output
        .results
        .iter()
        .map(|r| {
            (
                r.mutant_id.clone(),
                format!("{:?}/{:?}", r.outcome, r.detail),
                r.killed_by.clone(),
                r.executed_tests,
            )
        })
        .collect()
}
