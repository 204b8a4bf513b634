//! Line-coverage model, LCOV-style text interchange, and the pseudo-tested
//! coverage adjustment.
//!
//! The record grammar handled here, one record set per file:
//!
//! ```text
//! SF:<path>
//! DA:<line>,<hits>
//! LF:<n>          (optional, validated)
//! LH:<n>          (optional, validated)
//! end_of_record
//! ```
//!
//! Unknown record tags are tolerated and ignored. Duplicate `DA` lines for
//! the same line number sum their hit counts, matching the merge behavior of
//! the usual coverage toolchains.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::classify::{MethodClassification, Verdict};
use crate::method::MethodSite;

/// Per-file line hit counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CoverageModel {
    /// file path -> line number -> hit count.
    pub files: BTreeMap<String, BTreeMap<u32, u64>>,
}

impl CoverageModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an instrumented line, adding `hits` to any existing count.
    pub fn add_hits(&mut self, file: &str, line: u32, hits: u64) {
        *self
            .files
            .entry(file.to_string())
            .or_default()
            .entry(line)
            .or_insert(0) += hits;
    }

    /// Registers a line as instrumented without recording hits.
    pub fn ensure_line(&mut self, file: &str, line: u32) {
        self.files.entry(file.to_string()).or_default().entry(line).or_insert(0);
    }

    pub fn hit_count(&self, file: &str, line: u32) -> Option<u64> {
        self.files.get(file).and_then(|lines| lines.get(&line)).copied()
    }

    pub fn is_line_covered(&self, file: &str, line: u32) -> bool {
        self.hit_count(file, line).is_some_and(|h| h > 0)
    }

    /// Covered line numbers of one file (hit count >= 1).
    pub fn covered_lines(&self, file: &str) -> BTreeSet<u32> {
        self.files
            .get(file)
            .map(|lines| lines.iter().filter(|(_, h)| **h > 0).map(|(l, _)| *l).collect())
            .unwrap_or_default()
    }

    pub fn instrumented_count(&self) -> u64 {
        self.files.values().map(|l| l.len() as u64).sum()
    }

    pub fn covered_count(&self) -> u64 {
        self.files
            .values()
            .map(|l| l.values().filter(|h| **h > 0).count() as u64)
            .sum()
    }

    /// Merge another model into this one, summing hit counts.
    pub fn merge(&mut self, other: &CoverageModel) {
        for (file, lines) in &other.files {
            for (line, hits) in lines {
                self.add_hits(file, *line, *hits);
                self.ensure_line(file, *line);
            }
        }
    }
}

/// Non-fatal oddity found while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcovWarning {
    /// 1-based line in the input text.
    pub line: usize,
    pub message: String,
}

/// Fatal parse failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcovParseError {
    /// 1-based line in the input text.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LcovParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lcov parse error at line {}: {}", self.line, self.message)
    }
}

/// Parse result: the model plus any validation warnings (parsed data wins
/// over declared LF/LH totals).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcovDocument {
    pub model: CoverageModel,
    pub warnings: Vec<LcovWarning>,
}

/// One SF..end_of_record section while parsing.
struct Section {
    path: String,
    lines: BTreeMap<u32, u64>,
    declared_lf: Option<(usize, u64)>,
    declared_lh: Option<(usize, u64)>,
}

impl Section {
    fn close(self, model: &mut CoverageModel, warnings: &mut Vec<LcovWarning>) {
        let instrumented = self.lines.len() as u64;
        let hit = self.lines.values().filter(|h| **h > 0).count() as u64;
        if let Some((at, lf)) = self.declared_lf {
            if lf != instrumented {
                warnings.push(LcovWarning {
                    line: at,
                    message: format!("LF:{lf} disagrees with {instrumented} DA lines; parsed data wins"),
                });
            }
        }
        if let Some((at, lh)) = self.declared_lh {
            if lh != hit {
                warnings.push(LcovWarning {
                    line: at,
                    message: format!("LH:{lh} disagrees with {hit} hit lines; parsed data wins"),
                });
            }
        }
        let file = model.files.entry(self.path).or_default();
        for (line, hits) in self.lines {
            *file.entry(line).or_insert(0) += hits;
        }
    }
}

/// Parse LCOV-style text into a coverage model.
pub fn parse_lcov(text: &str) -> Result<LcovDocument, LcovParseError> {
    let mut model = CoverageModel::new();
    let mut warnings = Vec::new();
    let mut current: Option<Section> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if let Some(path) = line.strip_prefix("SF:") {
            if let Some(open) = current.take() {
                warnings.push(LcovWarning {
                    line: lineno,
                    message: "SF record before end_of_record; previous section closed".to_string(),
                });
                open.close(&mut model, &mut warnings);
            }
            if path.is_empty() {
                return Err(LcovParseError { line: lineno, message: "SF record with empty path".to_string() });
            }
            current = Some(Section {
                path: path.to_string(),
                lines: BTreeMap::new(),
                declared_lf: None,
                declared_lh: None,
            });
        } else if let Some(rest) = line.strip_prefix("DA:") {
            let section = current.as_mut().ok_or_else(|| LcovParseError {
                line: lineno,
                message: "DA record outside of an SF section".to_string(),
            })?;
            let mut fields = rest.split(',');
            let line_no: u32 = fields
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| LcovParseError {
                    line: lineno,
                    message: format!("malformed DA record: {line}"),
                })?;
            let hits: u64 = fields
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| LcovParseError {
                    line: lineno,
                    message: format!("malformed DA record: {line}"),
                })?;
            // A third checksum field is legal in the wild; ignore it.
            *section.lines.entry(line_no).or_insert(0) += hits;
        } else if let Some(rest) = line.strip_prefix("LF:") {
            let section = current.as_mut().ok_or_else(|| LcovParseError {
                line: lineno,
                message: "LF record outside of an SF section".to_string(),
            })?;
            let n: u64 = rest.trim().parse().map_err(|_| LcovParseError {
                line: lineno,
                message: format!("malformed LF record: {line}"),
            })?;
            section.declared_lf = Some((lineno, n));
        } else if let Some(rest) = line.strip_prefix("LH:") {
            let section = current.as_mut().ok_or_else(|| LcovParseError {
                line: lineno,
                message: "LH record outside of an SF section".to_string(),
            })?;
            let n: u64 = rest.trim().parse().map_err(|_| LcovParseError {
                line: lineno,
                message: format!("malformed LH record: {line}"),
            })?;
            section.declared_lh = Some((lineno, n));
        } else if line == "end_of_record" {
            match current.take() {
                Some(open) => open.close(&mut model, &mut warnings),
                None => warnings.push(LcovWarning {
                    line: lineno,
                    message: "end_of_record without an open SF section".to_string(),
                }),
            }
        } else {
            // Unknown record tag (TN:, FN:, BRDA:, ...): tolerated, ignored.
            continue;
        }
    }
    if let Some(open) = current.take() {
        warnings.push(LcovWarning {
            line: text.lines().count(),
            message: "input ended without end_of_record; section closed".to_string(),
        });
        open.close(&mut model, &mut warnings);
    }

    Ok(LcovDocument { model, warnings })
}

/// Errors from the coverage/classification consistency checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverageError {
    /// A pseudo-tested method refers to data the coverage model lacks.
    MethodNotInModel { method_id: String, file: String },
}

impl fmt::Display for CoverageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverageError::MethodNotInModel { method_id, file } => write!(
                f,
                "pseudo-tested method {method_id} ({file}) is absent from the coverage model"
            ),
        }
    }
}

/// Coverage with pseudo-tested lines forced to uncovered.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AdjustedCoverage {
    pub base: CoverageModel,
    /// Covered body lines of pseudo-tested methods, now counted uncovered.
    pub forced_uncovered: BTreeSet<(String, u32)>,
    pub original_ratio: f64,
    pub adjusted_ratio: f64,
    pub covered_total: u64,
    pub instrumented_total: u64,
    /// |forced_uncovered ∩ covered lines|, the amount the numerator drops.
    pub forced_covered_count: u64,
}

impl AdjustedCoverage {
    /// Wrap a model without forcing anything (ratios are equal).
    pub fn unadjusted(base: CoverageModel) -> Self {
        let covered = base.covered_count();
        let instrumented = base.instrumented_count();
        let ratio = if instrumented == 0 { 0.0 } else { covered as f64 / instrumented as f64 };
        AdjustedCoverage {
            base,
            forced_uncovered: BTreeSet::new(),
            original_ratio: ratio,
            adjusted_ratio: ratio,
            covered_total: covered,
            instrumented_total: instrumented,
            forced_covered_count: 0,
        }
    }

    pub fn original_percent(&self) -> String {
        crate::percent::fmt_percent(self.covered_total, self.instrumented_total)
    }

    pub fn adjusted_percent(&self) -> String {
        crate::percent::fmt_percent(
            self.covered_total - self.forced_covered_count,
            self.instrumented_total,
        )
    }
}

/// Force the covered body lines of pseudo-tested methods to uncovered and
/// recompute the coverage ratio.
pub fn adjust_coverage(
    coverage: &CoverageModel,
    classifications: &[MethodClassification],
    methods: &[MethodSite],
) -> Result<AdjustedCoverage, CoverageError> {
    let by_id: BTreeMap<&str, &MethodSite> = methods.iter().map(|m| (m.id.as_str(), m)).collect();
    let mut forced = BTreeSet::new();
    for c in classifications {
        if c.verdict != Verdict::PseudoTested {
            continue;
        }
        let Some(site) = by_id.get(c.method_id.as_str()) else {
            continue;
        };
        let file_lines = coverage.files.get(&site.file).ok_or_else(|| {
            CoverageError::MethodNotInModel { method_id: c.method_id.clone(), file: site.file.clone() }
        })?;
        if !site.covered_lines.is_empty()
            && !site.covered_lines.iter().any(|l| file_lines.contains_key(l))
        {
            return Err(CoverageError::MethodNotInModel {
                method_id: c.method_id.clone(),
                file: site.file.clone(),
            });
        }
        for &line in &site.covered_lines {
            forced.insert((site.file.clone(), line));
        }
    }

    let covered = coverage.covered_count();
    let instrumented = coverage.instrumented_count();
    let forced_covered = forced
        .iter()
        .filter(|(file, line)| coverage.is_line_covered(file, *line))
        .count() as u64;
    let original_ratio = if instrumented == 0 { 0.0 } else { covered as f64 / instrumented as f64 };
    let adjusted_ratio = if instrumented == 0 {
        0.0
    } else {
        (covered - forced_covered) as f64 / instrumented as f64
    };

    Ok(AdjustedCoverage {
        base: coverage.clone(),
        forced_uncovered: forced,
        original_ratio,
        adjusted_ratio,
        covered_total: covered,
        instrumented_total: instrumented,
        forced_covered_count: forced_covered,
    })
}

/// Emit LCOV text: forced-uncovered lines carry hit count 0, LF/LH are
/// recomputed, files and lines are sorted ascending.
pub fn emit_lcov(adjusted: &AdjustedCoverage) -> String {
    let mut out = String::new();
    for (file, lines) in &adjusted.base.files {
        out.push_str("SF:");
        out.push_str(file);
        out.push('\n');
        let mut hit_lines = 0u64;
        for (line, hits) in lines {
            let effective = if adjusted.forced_uncovered.contains(&(file.clone(), *line)) {
                0
            } else {
                *hits
            };
            if effective > 0 {
                hit_lines += 1;
            }
            out.push_str(&format!("DA:{line},{effective}\n"));
        }
        out.push_str(&format!("LF:{}\n", lines.len()));
        out.push_str(&format!("LH:{hit_lines}\n"));
        out.push_str("end_of_record\n");
    }
    out
}
