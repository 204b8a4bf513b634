//! Writes the adjusted coverage file and the annotated report from campaign
//! results plus a baseline coverage model. Never touches the subject tree.

use std::fs;
use std::path::{Path, PathBuf};

use husk_core::annotate::{render_report, AnnotatedSource, ReportInputs};
use husk_core::{adjust_coverage, emit_lcov, AdjustedCoverage, CoverageModel};

use crate::results::ResultsFile;

/// Paths produced by one report generation.
#[derive(Debug, Clone)]
pub struct ReportPaths {
    pub adjusted_coverage: PathBuf,
    pub annotated_report: PathBuf,
    pub baseline_coverage: PathBuf,
}

/// Regenerate the adjusted LCOV file and the annotated report.
///
/// `source_root` is read for annotation only; unreadable files are listed in
/// the report with a notice instead of failing the run.
pub fn write_reports(
    results: &ResultsFile,
    baseline: &CoverageModel,
    source_root: &Path,
    report_dir: &Path,
    coverage_out: &Path,
) -> anyhow::Result<(AdjustedCoverage, ReportPaths)> {
    let adjusted = adjust_coverage(baseline, &results.classifications, &results.methods)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    fs::create_dir_all(report_dir)?;
    if let Some(parent) = coverage_out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }

    fs::write(coverage_out, emit_lcov(&adjusted))?;

    let baseline_path = report_dir.join("baseline.lcov");
    fs::write(&baseline_path, emit_lcov(&AdjustedCoverage::unadjusted(baseline.clone())))?;

    let mut sources = Vec::new();
    let mut skipped = Vec::new();
    for file in baseline.files.keys() {
        match fs::read_to_string(source_root.join(file)) {
            Ok(text) => sources.push(AnnotatedSource { path: file.clone(), text }),
            Err(err) => skipped.push((file.clone(), format!("source not readable: {err}"))),
        }
    }

    let report = render_report(&ReportInputs {
        sources,
        skipped,
        adjusted: &adjusted,
        methods: &results.methods,
        classifications: &results.classifications,
        reason_tags: &results.reason_tags,
        summary: &results.summary,
    });
    let report_path = report_dir.join("annotated.md");
    fs::write(&report_path, report)?;

    Ok((
        adjusted,
        ReportPaths {
            adjusted_coverage: coverage_out.to_path_buf(),
            annotated_report: report_path,
            baseline_coverage: baseline_path,
        },
    ))
}
