//! The versioned, self-contained results file.
//!
//! Reports are reproducible from this file plus the baseline coverage file,
//! without re-running any tests. Field order is fixed by the struct
//! definitions and all maps are ordered, so serialization is canonical and
//! diffable; `created_at` and the wall-time fields are the only values that
//! vary between identical runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use husk_core::{
    CampaignConfig, ExtremeMutant, MethodClassification, MethodSite, MutantResult, ReasonTag,
    ReportSummary,
};

use crate::error::ResultsError;

pub const SCHEMA_VERSION: u32 = 1;

/// Snapshot of everything that shaped a campaign.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub project_root: String,
    pub campaign: CampaignConfig,
    pub assertion_patterns: Vec<String>,
    pub test_globs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsFile {
    pub schema_version: u32,
    pub created_at: String,
    pub tool_version: String,
    pub tree_hash: String,
    pub config: ConfigSnapshot,
    pub notes: Vec<String>,
    pub methods: Vec<MethodSite>,
    pub mutants: Vec<ExtremeMutant>,
    pub results: Vec<MutantResult>,
    pub classifications: Vec<MethodClassification>,
    pub reason_tags: BTreeMap<String, ReasonTag>,
    pub summary: ReportSummary,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

impl ResultsFile {
    pub fn save(&self, path: &Path) -> Result<(), ResultsError> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Load and check the schema version before anything else, so a newer
    /// file fails with both versions named instead of a parse error.
    pub fn load(path: &Path) -> Result<ResultsFile, ResultsError> {
        let text = fs::read_to_string(path)?;
        let probe: VersionProbe = serde_json::from_str(&text)?;
        if probe.schema_version != SCHEMA_VERSION {
            return Err(ResultsError::SchemaMismatch {
                found: probe.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        Ok(serde_json::from_str(&text)?)
    }
}
