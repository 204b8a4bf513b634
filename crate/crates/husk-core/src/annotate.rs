//! Annotated per-file coverage report with pseudo-tested code highlighted.
//!
//! Plain text/markdown output, deterministic line for line, so reports can be
//! golden-file tested and diffed. Every source line carries exactly one
//! marker:
//!
//! ```text
//! P  pseudo-tested (covered, but forced to uncovered)
//! ~  partially-tested (covered line of a partially-tested method)
//! +  covered
//! -  instrumented but not executed
//! (space)  not instrumented
//! ```

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::classify::{MethodClassification, ReasonTag, ReportSummary, Verdict};
use crate::coverage::AdjustedCoverage;
use crate::method::{MethodSite, ReturnKind};
use crate::mutant::variants_for;
use crate::percent::fmt_percent;

/// Source text of one readable subject file.
#[derive(Debug, Clone)]
pub struct AnnotatedSource {
    pub path: String,
    pub text: String,
}

/// Everything the renderer needs; produced by the IO layer.
#[derive(Debug, Clone)]
pub struct ReportInputs<'a> {
    pub sources: Vec<AnnotatedSource>,
    /// Files that could not be read: (path, notice).
    pub skipped: Vec<(String, String)>,
    pub adjusted: &'a AdjustedCoverage,
    pub methods: &'a [MethodSite],
    pub classifications: &'a [MethodClassification],
    pub reason_tags: &'a BTreeMap<String, ReasonTag>,
    pub summary: &'a ReportSummary,
}

fn marker_for(
    file: &str,
    line: u32,
    adjusted: &AdjustedCoverage,
    partial_lines: &BTreeSet<(String, u32)>,
) -> char {
    if adjusted.forced_uncovered.contains(&(file.to_string(), line)) {
        return 'P';
    }
    match adjusted.base.hit_count(file, line) {
        Some(h) if h > 0 => {
            if partial_lines.contains(&(file.to_string(), line)) {
                '~'
            } else {
                '+'
            }
        }
        Some(_) => '-',
        None => ' ',
    }
}

/// Render the whole report: header with the variant table, campaign summary,
/// the pseudo-tested method table, then one annotated section per file.
pub fn render_report(inputs: &ReportInputs<'_>) -> String {
    let mut out = String::new();
    out.push_str("# husk coverage report (extreme mutation adjusted)\n\n");
    out.push_str("Markers: `P` pseudo-tested (counted uncovered)  `~` partially-tested  ");
    out.push_str("`+` covered  `-` uncovered\n\n");

    out.push_str("Replacement variants per return kind:\n\n");
    for kind in [
        ReturnKind::Void,
        ReturnKind::Boolean,
        ReturnKind::IntegerLike,
        ReturnKind::FloatLike,
        ReturnKind::StringLike,
        ReturnKind::CharLike,
        ReturnKind::Reference,
    ] {
        let names: Vec<&str> = variants_for(kind).iter().map(|v| v.as_str()).collect();
        out.push_str(&format!("- {}: {}\n", kind.as_str(), names.join(", ")));
    }
    out.push_str(
        "\nGeneric and type-parameterized return types are treated as reference \
         returns (neutral-constructor replacement).\n\n",
    );

    render_summary(&mut out, inputs);
    render_pseudo_table(&mut out, inputs);

    let partial_lines = partial_covered_lines(inputs.methods, inputs.classifications);

    let mut sources = inputs.sources.clone();
    sources.sort_by(|a, b| a.path.cmp(&b.path));
    for src in &sources {
        render_file(&mut out, src, inputs.adjusted, &partial_lines);
    }

    let mut skipped = inputs.skipped.clone();
    skipped.sort();
    for (path, notice) in &skipped {
        out.push_str(&format!("## {path}\n\nskipped: {notice}\n\n"));
    }
    out
}

fn render_summary(out: &mut String, inputs: &ReportInputs<'_>) {
    let s = inputs.summary;
    let adj = inputs.adjusted;
    out.push_str("## Summary\n\n");
    out.push_str(&format!(
        "- mutation score: {} ({} / {} valid mutants; {} survived, {} invalid)\n",
        s.score_rendered(),
        s.killed,
        s.total_valid,
        s.survived,
        s.invalid
    ));
    out.push_str(&format!(
        "- methods: {} total, {} pseudo-tested ({}), {} unmutatable\n",
        s.methods_total,
        s.methods_pseudo,
        fmt_percent(s.methods_pseudo, s.methods_total),
        s.methods_unmutatable,
    ));
    out.push_str(&format!(
        "- pseudo-tested lines: {} covered ({} of covered), {} total ({} of instrumented)\n",
        s.lines_covered_pseudo,
        fmt_percent(s.lines_covered_pseudo, adj.covered_total),
        s.lines_total_pseudo,
        fmt_percent(s.lines_total_pseudo, adj.instrumented_total),
    ));
    out.push_str(&format!(
        "- line coverage: {}/{} ({}) -> adjusted {}/{} ({})\n\n",
        adj.covered_total,
        adj.instrumented_total,
        adj.original_percent(),
        adj.covered_total - adj.forced_covered_count,
        adj.instrumented_total,
        adj.adjusted_percent(),
    ));
}

fn render_pseudo_table(out: &mut String, inputs: &ReportInputs<'_>) {
    let pseudo: Vec<&MethodClassification> = inputs
        .classifications
        .iter()
        .filter(|c| c.verdict == Verdict::PseudoTested)
        .collect();
    if pseudo.is_empty() {
        out.push_str("No pseudo-tested methods found.\n\n");
        return;
    }
    let by_id: BTreeMap<&str, &MethodSite> =
        inputs.methods.iter().map(|m| (m.id.as_str(), m)).collect();
    out.push_str("## Pseudo-tested methods\n\n");
    out.push_str("| method | access | lines (covered/total) | reason | surviving variants |\n");
    out.push_str("|---|---|---|---|---|\n");
    let mut rows: Vec<String> = Vec::new();
    for c in &pseudo {
        let Some(site) = by_id.get(c.method_id.as_str()) else {
            continue;
        };
        let tag = inputs
            .reason_tags
            .get(&c.method_id)
            .map(|t| t.as_str())
            .unwrap_or("inspect-manually");
        let variants: Vec<&str> = c.surviving_variants.iter().map(|v| v.as_str()).collect();
        rows.push(format!(
            "| {} | {} | {}/{} | {} | {} |",
            c.method_id,
            site.access.as_str(),
            site.covered_lines.len(),
            site.body_line_count,
            tag,
            variants.join(", "),
        ));
    }
    rows.sort();
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out.push('\n');
}

fn partial_covered_lines(
    methods: &[MethodSite],
    classifications: &[MethodClassification],
) -> BTreeSet<(String, u32)> {
    let by_id: BTreeMap<&str, &MethodSite> = methods.iter().map(|m| (m.id.as_str(), m)).collect();
    let mut lines = BTreeSet::new();
    for c in classifications {
        if c.verdict != Verdict::PartiallyTested {
            continue;
        }
        if let Some(site) = by_id.get(c.method_id.as_str()) {
            for &line in &site.covered_lines {
                lines.insert((site.file.clone(), line));
            }
        }
    }
    lines
}

fn render_file(
    out: &mut String,
    src: &AnnotatedSource,
    adjusted: &AdjustedCoverage,
    partial_lines: &BTreeSet<(String, u32)>,
) {
    out.push_str(&format!("## {}\n\n", src.path));
    out.push_str("```text\n");
    for (idx, text) in src.text.lines().enumerate() {
        let line = (idx + 1) as u32;
        let marker = marker_for(&src.path, line, adjusted, partial_lines);
        out.push_str(&format!("{marker} {line:>5} | {text}\n"));
    }
    out.push_str("```\n\n");

    let file_lines = adjusted.base.files.get(&src.path);
    let instrumented = file_lines.map(|l| l.len() as u64).unwrap_or(0);
    let covered = file_lines
        .map(|l| l.values().filter(|h| **h > 0).count() as u64)
        .unwrap_or(0);
    let forced_covered = adjusted
        .forced_uncovered
        .iter()
        .filter(|(f, line)| f == &src.path && adjusted.base.is_line_covered(f, *line))
        .count() as u64;
    out.push_str(&format!(
        "coverage: {covered}/{instrumented} lines ({}) -> adjusted {}/{instrumented} ({})\n\n",
        fmt_percent(covered, instrumented),
        covered - forced_covered,
        fmt_percent(covered - forced_covered, instrumented),
    ));
}
