//! Campaign configuration and the focused-mode method filter.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::method::{Access, MethodSite};

/// How tests are chosen per mutant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TestSelection {
    /// Only the tests whose baseline coverage touches the mutated body.
    #[default]
    CoveringTests,
    /// The entire suite, regardless of coverage intersection.
    FullSuite,
}

/// Knobs for one campaign.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CampaignConfig {
    /// Per-mutant test timeout = max(timeout_factor × baseline time of the
    /// selected tests, timeout_floor).
    pub timeout_factor: f64,
    pub timeout_floor: Duration,
    pub test_selection: TestSelection,
    pub method_filter: Option<MethodFilter>,
    /// Worker count; workers operate on fully independent tree copies and
    /// results are identical to serial execution.
    pub parallelism: u32,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            timeout_factor: 3.0,
            timeout_floor: Duration::from_secs(10),
            test_selection: TestSelection::CoveringTests,
            method_filter: None,
            parallelism: 1,
        }
    }
}

/// Invalid configuration values.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    TimeoutFactorTooSmall(f64),
    ZeroParallelism,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::TimeoutFactorTooSmall(v) => {
                write!(f, "timeout factor must be greater than 1 (got {v})")
            }
            ConfigError::ZeroParallelism => write!(f, "parallelism must be at least 1"),
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        // NaN must be rejected too, so compare via partial_cmp.
        if self.timeout_factor.partial_cmp(&1.0) != Some(core::cmp::Ordering::Greater) {
            return Err(ConfigError::TimeoutFactorTooSmall(self.timeout_factor));
        }
        if self.parallelism == 0 {
            return Err(ConfigError::ZeroParallelism);
        }
        Ok(())
    }

    /// Timeout for a mutant whose selected tests took `subset_baseline` in
    /// the baseline run.
    pub fn mutant_timeout(&self, subset_baseline: Duration) -> Duration {
        let scaled = subset_baseline.mul_f64(self.timeout_factor);
        scaled.max(self.timeout_floor)
    }
}

/// Focused-mode predicate over discovered methods.
///
/// Each non-empty dimension narrows the selection; a method must satisfy all
/// of them. `only` patterns support `*` and `?` wildcards and match against
/// the method id, its bare name, and its file path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MethodFilter {
    pub only: Vec<String>,
    pub access: Vec<Access>,
    /// Exact relative paths, as supplied by an external changed-file list.
    pub changed_files: Vec<String>,
}

impl MethodFilter {
    pub fn is_empty(&self) -> bool {
        self.only.is_empty() && self.access.is_empty() && self.changed_files.is_empty()
    }

    pub fn matches(&self, site: &MethodSite) -> bool {
        if !self.only.is_empty() {
            let hit = self.only.iter().any(|p| {
                wild_match(p, &site.id) || wild_match(p, &site.name) || wild_match(p, &site.file)
            });
            if !hit {
                return false;
            }
        }
        if !self.access.is_empty() && !self.access.contains(&site.access) {
            return false;
        }
        if !self.changed_files.is_empty()
            && !self.changed_files.iter().any(|f| f == &site.file)
        {
            return false;
        }
        true
    }
}

/// Glob-lite matcher: `*` matches any run of characters, `?` a single one.
pub fn wild_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0usize, 0usize);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == '*' {
        pi += 1;
    }
    pi == p.len()
}
