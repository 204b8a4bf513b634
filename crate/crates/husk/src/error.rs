//! Error types for the subject adapter and campaign layers.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PatchError {
    /// The on-disk file no longer matches the content seen at discovery.
    #[error("stale span: {file} changed since discovery; re-discover before mutating")]
    StaleSpan { file: String },
    #[error("body span {start}..{end} is out of bounds for {file} ({len} bytes)")]
    SpanOutOfBounds { file: String, start: usize, end: usize, len: usize },
    #[error("io error patching {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Error)]
pub enum DiscoverError {
    #[error("project root {0} is not a directory")]
    NotADirectory(PathBuf),
    #[error("{0} does not look like a cargo package (no Cargo.toml)")]
    NotAPackage(PathBuf),
    #[error("io error reading {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("failed to spawn {what}: {source}")]
    Spawn { what: String, source: io::Error },
    #[error("io error talking to {what}: {source}")]
    Io { what: String, source: io::Error },
    #[error("could not parse cargo build messages: {0}")]
    BuildMessages(String),
    #[error("test binary {0} failed to list its tests")]
    ListFailed(String),
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("baseline is red; failing tests: {}", failed.join(", "))]
    RedBaseline { failed: Vec<String> },
    #[error("baseline test run errored: {diagnostics}")]
    BaselineRunError { diagnostics: String },
    #[error("no tests found in the subject project")]
    NoTestsFound,
    #[error("coverage instrumentation failed: {diagnostics}")]
    InstrumentationFailure { diagnostics: String },
    #[error("the subject tree changed while the campaign was running")]
    TreeChanged,
    #[error(transparent)]
    Discover(#[from] DiscoverError),
    #[error(transparent)]
    Runner(#[from] RunnerError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum ResultsError {
    #[error("results file schema version {found} is not supported (tool supports {supported})")]
    SchemaMismatch { found: u32, supported: u32 },
    #[error("could not parse results file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}
