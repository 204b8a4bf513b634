//! Everything that touches the subject project: discovery, patching,
//! building, test execution, instrumentation, and coverage capture. This is
//! the only module that runs external processes or reads subject sources.

pub mod coverage;
pub mod discover;
pub mod instrument;
pub mod patch;
pub mod runner;
pub mod tree;

pub use coverage::{capture_baseline_coverage, BaselineCoverage};
pub use discover::{discover_methods, DiscoveryConfig, DiscoverySnapshot, FileDiagnostic};
pub use instrument::{instrument_tree, ProbeMap};
pub use patch::{apply_mutation, AppliedPatch};
pub use runner::{run_tests, BuildOutcome, CargoRunner, TestBinary, TestCase};
pub use tree::{copy_tree, file_hash, tree_hash, Workspace};
