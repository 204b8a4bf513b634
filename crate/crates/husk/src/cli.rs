//! Command-line interface: `husk run` and `husk report`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use husk_core::{parse_lcov, Access, CampaignConfig, MethodFilter, TestSelection, Verdict};

use crate::campaign::{run_campaign, CampaignOptions, StderrProgress, SubjectOptions};
use crate::error::{CampaignError, ResultsError};
use crate::report_io::write_reports;
use crate::results::{ConfigSnapshot, ResultsFile, SCHEMA_VERSION};
use crate::subject::discover::DiscoveryConfig;

/// Exit code for refusals and infrastructure errors.
const EXIT_INFRA: u8 = 2;
/// Exit code when the pseudo-tested threshold is exceeded.
const EXIT_THRESHOLD: u8 = 1;

#[derive(Parser)]
#[command(
    name = "husk",
    version,
    about = "Extreme mutation testing: find pseudo-tested methods and fold them into coverage reports"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mutation campaign against a cargo project.
    Run(Box<RunArgs>),
    /// Regenerate reports from a results file and a coverage file.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Structured,
}

#[derive(Args)]
struct RunArgs {
    /// Subject project root (a cargo package).
    #[arg(long, default_value = ".")]
    project: PathBuf,

    /// Restrict the campaign to methods matching these id/name/file
    /// patterns (`*` and `?` wildcards). Implies focused mode.
    #[arg(long)]
    only: Vec<String>,

    /// File listing changed source paths (one per line); only methods in
    /// those files are mutated. Implies focused mode.
    #[arg(long)]
    changed_from: Option<PathBuf>,

    /// Restrict to methods with these access levels
    /// (public, package, protected, private, other).
    #[arg(long, value_delimiter = ',')]
    access: Vec<String>,

    /// Run the whole suite against every mutant instead of covering tests.
    #[arg(long)]
    full_suite: bool,

    /// Parallel workers; each works on an independent tree copy.
    #[arg(long, default_value_t = 1)]
    jobs: u32,

    /// Per-mutant timeout = max(factor x baseline time of selected tests, 10s).
    #[arg(long, default_value_t = 3.0)]
    timeout_factor: f64,

    /// Fail (exit 1) when more than this many pseudo-tested methods remain.
    #[arg(long)]
    max_pseudo: Option<u64>,

    /// Adjusted coverage output path (LCOV). Default: husk-out/coverage.lcov
    #[arg(long)]
    coverage_out: Option<PathBuf>,

    /// Report directory (annotated report + baseline coverage).
    /// Default: husk-out/report
    #[arg(long)]
    report_out: Option<PathBuf>,

    /// Results file path. Default: husk-out/results.json
    #[arg(long)]
    results_out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    /// Baseline-coverage cache directory (focused mode reuses it when the
    /// tree is unchanged). Default: <system temp>/husk-cache
    #[arg(long)]
    cache_dir: Option<PathBuf>,

    /// Extra glob excluding files from discovery as test code
    /// (default: tests/*, benches/*, examples/*).
    #[arg(long)]
    test_glob: Vec<String>,

    /// Assertion idioms for the no-assertion heuristic (replaces defaults).
    #[arg(long)]
    assert_pattern: Vec<String>,

    /// If coverage instrumentation fails, continue with every method
    /// considered covered instead of aborting.
    #[arg(long)]
    coverage_fallback: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Results file written by `husk run`.
    #[arg(long)]
    results: PathBuf,

    /// Baseline coverage file (LCOV) written by `husk run`.
    #[arg(long)]
    coverage: PathBuf,

    /// Adjusted coverage output path. Default: husk-out/coverage.lcov
    #[arg(long)]
    coverage_out: Option<PathBuf>,

    /// Report directory. Default: husk-out/report
    #[arg(long)]
    report_out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

/// Parse argv and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // clap handles --help/--version through this path too.
            let _ = err.print();
            return if err.use_stderr() { EXIT_INFRA } else { 0 };
        }
    };
    match cli.command {
        Command::Run(args) => cmd_run(*args),
        Command::Report(args) => cmd_report(args),
    }
}

fn parse_access(values: &[String]) -> Result<Vec<Access>, String> {
    values
        .iter()
        .map(|v| match v.as_str() {
            "public" => Ok(Access::Public),
            "package" => Ok(Access::Package),
            "protected" => Ok(Access::Protected),
            "private" => Ok(Access::Private),
            "other" => Ok(Access::Other),
            other => Err(format!("unknown access level: {other}")),
        })
        .collect()
}

fn cmd_run(args: RunArgs) -> u8 {
    let project = match args.project.canonicalize() {
        Ok(p) => p,
        Err(err) => {
            eprintln!("husk: cannot open project {}: {err}", args.project.display());
            return EXIT_INFRA;
        }
    };

    let access = match parse_access(&args.access) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("husk: {msg}");
            return EXIT_INFRA;
        }
    };

    let changed_files = match &args.changed_from {
        None => Vec::new(),
        Some(path) => match fs::read_to_string(path) {
            Ok(text) => text
                .lines()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty())
                .collect(),
            Err(err) => {
                eprintln!("husk: cannot read changed-file list {}: {err}", path.display());
                return EXIT_INFRA;
            }
        },
    };

    let filter = MethodFilter { only: args.only.clone(), access, changed_files };
    let focused = !filter.is_empty();

    let config = CampaignConfig {
        timeout_factor: args.timeout_factor,
        test_selection: if args.full_suite {
            TestSelection::FullSuite
        } else {
            TestSelection::CoveringTests
        },
        method_filter: if focused { Some(filter) } else { None },
        parallelism: args.jobs,
        ..CampaignConfig::default()
    };

    let mut discovery = DiscoveryConfig::default();
    discovery.test_globs.extend(args.test_glob.clone());

    let assertion_patterns = if args.assert_pattern.is_empty() {
        husk_core::default_assertion_patterns()
    } else {
        args.assert_pattern.clone()
    };

    let cache_dir = args
        .cache_dir
        .clone()
        .unwrap_or_else(|| std::env::temp_dir().join("husk-cache"));

    let subject = SubjectOptions { root: project.clone(), discovery: discovery.clone() };
    let options = CampaignOptions {
        config: config.clone(),
        assertion_patterns: assertion_patterns.clone(),
        cache_dir: Some(cache_dir),
        use_baseline_cache: focused,
        instrumentation_fallback: args.coverage_fallback,
    };

    let output = match run_campaign(&subject, &options, &StderrProgress) {
        Ok(o) => o,
        Err(CampaignError::RedBaseline { failed }) => {
            eprintln!("husk: baseline is red; failing tests:");
            for test in failed {
                eprintln!("  {test}");
            }
            return EXIT_INFRA;
        }
        Err(err) => {
            eprintln!("husk: {err}");
            return EXIT_INFRA;
        }
    };

    let out_dir = PathBuf::from("husk-out");
    let results_path = args.results_out.clone().unwrap_or_else(|| out_dir.join("results.json"));
    let coverage_path = args.coverage_out.clone().unwrap_or_else(|| out_dir.join("coverage.lcov"));
    let report_dir = args.report_out.clone().unwrap_or_else(|| out_dir.join("report"));

    let results_file = ResultsFile {
        schema_version: SCHEMA_VERSION,
        created_at: chrono::Utc::now().to_rfc3339(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        tree_hash: output.snapshot.tree_hash.clone(),
        config: ConfigSnapshot {
            project_root: project.display().to_string(),
            campaign: config,
            assertion_patterns,
            test_globs: discovery.test_globs.clone(),
        },
        notes: output.notes.clone(),
        methods: output.selected.clone(),
        mutants: output.mutants.clone(),
        results: output.results.clone(),
        classifications: output.classifications.clone(),
        reason_tags: output.reason_tags.clone(),
        summary: output.summary.clone(),
    };

    if let Err(err) = results_file.save(&results_path) {
        eprintln!("husk: cannot write results file: {err}");
        return EXIT_INFRA;
    }
    let adjusted = match write_reports(
        &results_file,
        &output.baseline.model,
        &project,
        &report_dir,
        &coverage_path,
    ) {
        Ok((adjusted, _)) => adjusted,
        Err(err) => {
            eprintln!("husk: cannot write reports: {err}");
            return EXIT_INFRA;
        }
    };

    print_summary(&results_file, &adjusted, args.format, &results_path, &coverage_path, &report_dir);

    match args.max_pseudo {
        Some(max) if results_file.summary.methods_pseudo > max => EXIT_THRESHOLD,
        _ => 0,
    }
}

fn cmd_report(args: ReportArgs) -> u8 {
    let results = match ResultsFile::load(&args.results) {
        Ok(r) => r,
        Err(ResultsError::SchemaMismatch { found, supported }) => {
            eprintln!(
                "husk: results file has schema version {found}, this tool supports {supported}"
            );
            return EXIT_INFRA;
        }
        Err(err) => {
            eprintln!("husk: cannot load results file: {err}");
            return EXIT_INFRA;
        }
    };

    let coverage_text = match fs::read_to_string(&args.coverage) {
        Ok(t) => t,
        Err(err) => {
            eprintln!("husk: cannot read coverage file {}: {err}", args.coverage.display());
            return EXIT_INFRA;
        }
    };
    let baseline = match parse_lcov(&coverage_text) {
        Ok(doc) => {
            for warning in &doc.warnings {
                eprintln!("husk: coverage warning (line {}): {}", warning.line, warning.message);
            }
            doc.model
        }
        Err(err) => {
            eprintln!("husk: {err}");
            return EXIT_INFRA;
        }
    };

    let out_dir = PathBuf::from("husk-out");
    let coverage_path = args.coverage_out.clone().unwrap_or_else(|| out_dir.join("coverage.lcov"));
    let report_dir = args.report_out.clone().unwrap_or_else(|| out_dir.join("report"));
    let source_root = PathBuf::from(&results.config.project_root);

    let adjusted = match write_reports(&results, &baseline, &source_root, &report_dir, &coverage_path)
    {
        Ok((adjusted, _)) => adjusted,
        Err(err) => {
            eprintln!("husk: cannot write reports: {err}");
            return EXIT_INFRA;
        }
    };

    print_summary(&results, &adjusted, args.format, &args.results, &coverage_path, &report_dir);
    0
}

fn verdict_counts(results: &ResultsFile) -> BTreeMap<&'static str, u64> {
    let mut counts = BTreeMap::new();
    for c in &results.classifications {
        let key = match c.verdict {
            Verdict::Tested => "tested",
            Verdict::PartiallyTested => "partially_tested",
            Verdict::PseudoTested => "pseudo_tested",
            Verdict::Uncovered => "uncovered",
            Verdict::Unmutatable => "unmutatable",
        };
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

fn print_summary(
    results: &ResultsFile,
    adjusted: &husk_core::AdjustedCoverage,
    format: OutputFormat,
    results_path: &Path,
    coverage_path: &Path,
    report_dir: &Path,
) {
    let s = &results.summary;
    match format {
        OutputFormat::Text => {
            println!(
                "score {}  killed/total {} / {}  survived {}  mutators {}  executed tests {}  time {:.1}s",
                s.score_rendered(),
                s.killed,
                s.total_valid,
                s.survived,
                s.mutator_kinds_used,
                s.executed_tests_total,
                s.wall_time_total.as_secs_f64(),
            );
            let counts = verdict_counts(results);
            println!(
                "methods {} total: {} tested, {} partially-tested, {} pseudo-tested, {} uncovered, {} unmutatable",
                s.methods_total,
                counts.get("tested").copied().unwrap_or(0),
                counts.get("partially_tested").copied().unwrap_or(0),
                counts.get("pseudo_tested").copied().unwrap_or(0),
                counts.get("uncovered").copied().unwrap_or(0),
                counts.get("unmutatable").copied().unwrap_or(0),
            );
            println!(
                "line coverage {} -> adjusted {} (pseudo-tested lines: {} covered, {} total)",
                adjusted.original_percent(),
                adjusted.adjusted_percent(),
                s.lines_covered_pseudo,
                s.lines_total_pseudo,
            );
            for c in &results.classifications {
                if c.verdict == Verdict::PseudoTested {
                    let tag = results
                        .reason_tags
                        .get(&c.method_id)
                        .map(|t| t.as_str())
                        .unwrap_or("inspect-manually");
                    println!("pseudo-tested: {} [{tag}]", c.method_id);
                }
            }
            println!(
                "outputs: results {}  coverage {}  report {}",
                results_path.display(),
                coverage_path.display(),
                report_dir.display(),
            );
        }
        OutputFormat::Structured => {
            let counts = verdict_counts(results);
            let doc = serde_json::json!({
                "score": s.score,
                "score_rendered": s.score_rendered(),
                "killed": s.killed,
                "total_valid": s.total_valid,
                "survived": s.survived,
                "invalid": s.invalid,
                "mutator_kinds_used": s.mutator_kinds_used,
                "executed_tests_total": s.executed_tests_total,
                "wall_time_seconds": s.wall_time_total.as_secs_f64(),
                "methods": {
                    "total": s.methods_total,
                    "tested": counts.get("tested").copied().unwrap_or(0),
                    "partially_tested": counts.get("partially_tested").copied().unwrap_or(0),
                    "pseudo_tested": counts.get("pseudo_tested").copied().unwrap_or(0),
                    "uncovered": counts.get("uncovered").copied().unwrap_or(0),
                    "unmutatable": counts.get("unmutatable").copied().unwrap_or(0),
                },
                "coverage": {
                    "original_ratio": adjusted.original_ratio,
                    "adjusted_ratio": adjusted.adjusted_ratio,
                    "original_rendered": adjusted.original_percent(),
                    "adjusted_rendered": adjusted.adjusted_percent(),
                },
                "outputs": {
                    "results": results_path.display().to_string(),
                    "coverage": coverage_path.display().to_string(),
                    "report": report_dir.display().to_string(),
                },
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
    }
}
