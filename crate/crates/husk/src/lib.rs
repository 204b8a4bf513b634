//! Extreme mutation testing for Rust projects.
//!
//! `husk` replaces whole method bodies with trivial stand-ins (empty bodies,
//! constant returns), re-runs the covering tests, and reports methods whose
//! suite never notices: pseudo-tested code. Findings are folded back into
//! line-coverage output so pseudo-tested lines show up as uncovered.
//!
//! The pure analysis layer lives in [`husk_core`]; this crate adds the
//! subject adapter (discovery, patching, building, running, coverage
//! capture), campaign orchestration, result persistence, reporting IO, and
//! the CLI.

pub mod campaign;
pub mod cli;
pub mod error;
pub mod report_io;
pub mod results;
pub mod subject;
pub mod testsrc;

pub use campaign::{
    run_campaign, verify_baseline, Baseline, CampaignOptions, CampaignOutput, Progress,
    SilentProgress, StderrProgress, SubjectOptions,
};
pub use error::{CampaignError, DiscoverError, PatchError, ResultsError, RunnerError};
pub use results::{ConfigSnapshot, ResultsFile, SCHEMA_VERSION};
