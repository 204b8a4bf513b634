//! Cargo and test-binary subprocess execution.
//!
//! Builds test targets (`cargo test --tests --no-run --message-format=json`),
//! lists tests per binary, and runs tests either one process per test (for
//! selection and per-test coverage) or as a full `cargo test` suite. All
//! child processes run under a deadline and are killed when it passes.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

use husk_core::{RunStatus, TestRunResult};

use crate::error::RunnerError;
use crate::subject::instrument::COV_OUT_ENV;

/// A compiled test executable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestBinary {
    pub target_name: String,
    pub executable: PathBuf,
}

/// One runnable test: `id` is `<target>::<path::within::binary>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub id: String,
    pub target_name: String,
    pub test_name: String,
    pub executable: PathBuf,
}

/// Result of building the test targets.
#[derive(Debug)]
pub enum BuildOutcome {
    Built(Vec<TestBinary>),
    Failed { diagnostics: String },
}

/// Runs cargo and test binaries for one tree copy with its own target dir.
#[derive(Debug, Clone)]
pub struct CargoRunner {
    pub project_root: PathBuf,
    pub target_dir: PathBuf,
}

fn cargo_binary() -> String {
    std::env::var("CARGO").unwrap_or_else(|_| "cargo".to_string())
}

impl CargoRunner {
    pub fn new(project_root: &Path, target_dir: &Path) -> Self {
        CargoRunner {
            project_root: project_root.to_path_buf(),
            target_dir: target_dir.to_path_buf(),
        }
    }

    fn cargo(&self) -> Command {
        let mut cmd = Command::new(cargo_binary());
        cmd.current_dir(&self.project_root)
            .env("CARGO_TARGET_DIR", &self.target_dir)
            .env_remove(COV_OUT_ENV)
            .stdin(Stdio::null());
        cmd
    }

    /// Build all test targets and return their executables.
    pub fn build_tests(&self, timeout: Duration) -> Result<BuildOutcome, RunnerError> {
        let mut cmd = self.cargo();
        cmd.args(["test", "--tests", "--no-run", "--message-format=json"]);
        let out = run_with_deadline(cmd, "cargo test --no-run", Instant::now() + timeout)?;
        if out.timed_out {
            return Ok(BuildOutcome::Failed {
                diagnostics: format!("build timed out after {}s", timeout.as_secs()),
            });
        }

        let mut binaries = Vec::new();
        let mut rendered = String::new();
        for line in out.stdout.lines() {
            let Ok(msg) = serde_json::from_str::<serde_json::Value>(line) else {
                continue;
            };
            match msg.get("reason").and_then(|r| r.as_str()) {
                Some("compiler-artifact") => {
                    if let Some(exe) = msg.get("executable").and_then(|e| e.as_str()) {
                        let name = msg
                            .pointer("/target/name")
                            .and_then(|n| n.as_str())
                            .unwrap_or("unknown")
                            .to_string();
                        binaries.push(TestBinary {
                            target_name: name,
                            executable: PathBuf::from(exe),
                        });
                    }
                }
                Some("compiler-message") => {
                    if let Some(text) = msg.pointer("/message/rendered").and_then(|r| r.as_str()) {
                        rendered.push_str(text);
                    }
                }
                _ => {}
            }
        }
        if !out.success() {
            if rendered.is_empty() {
                rendered = tail(&out.stderr, 4000);
            }
            return Ok(BuildOutcome::Failed { diagnostics: rendered });
        }
        binaries.sort_by(|a, b| (&a.target_name, &a.executable).cmp(&(&b.target_name, &b.executable)));
        binaries.dedup();
        disambiguate_targets(&mut binaries);
        Ok(BuildOutcome::Built(binaries))
    }

    /// List the tests of every binary; ids are sorted and unique.
    pub fn list_tests(&self, binaries: &[TestBinary]) -> Result<Vec<TestCase>, RunnerError> {
        let mut cases = Vec::new();
        for binary in binaries {
            let mut cmd = Command::new(&binary.executable);
            cmd.args(["--list", "--format", "terse"])
                .current_dir(&self.project_root)
                .env_remove(COV_OUT_ENV)
                .stdin(Stdio::null());
            let out = run_with_deadline(
                cmd,
                &format!("{} --list", binary.executable.display()),
                Instant::now() + Duration::from_secs(60),
            )?;
            if !out.success() || out.timed_out {
                return Err(RunnerError::ListFailed(binary.executable.display().to_string()));
            }
            for line in out.stdout.lines() {
                if let Some(name) = line.strip_suffix(": test") {
                    cases.push(TestCase {
                        id: format!("{}::{}", binary.target_name, name),
                        target_name: binary.target_name.clone(),
                        test_name: name.to_string(),
                        executable: binary.executable.clone(),
                    });
                }
            }
        }
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(cases)
    }

    /// Run one test in its own process. `extra_env` is applied to the child.
    pub fn run_single(
        &self,
        case: &TestCase,
        deadline: Instant,
        extra_env: &[(String, String)],
    ) -> Result<SingleRun, RunnerError> {
        let mut cmd = Command::new(&case.executable);
        cmd.arg(&case.test_name)
            .args(["--exact", "--test-threads", "1", "-q"])
            .current_dir(&self.project_root)
            .env_remove(COV_OUT_ENV)
            .stdin(Stdio::null());
        for (k, v) in extra_env {
            cmd.env(k, v);
        }
        let start = Instant::now();
        let out = run_with_deadline(cmd, &case.id, deadline)?;
        let status = if out.timed_out {
            SingleStatus::TimedOut
        } else if out.success() && !out.stdout.contains("FAILED") {
            SingleStatus::Passed
        } else {
            SingleStatus::Failed
        };
        Ok(SingleRun { status, wall_time: start.elapsed(), output: out.stdout })
    }

    /// Run exactly the given tests serially, stopping at the deadline.
    pub fn run_selected(&self, cases: &[TestCase], timeout: Duration) -> Result<TestRunResult, RunnerError> {
        let start = Instant::now();
        let deadline = start + timeout;
        let mut failed = Vec::new();
        let mut executed = 0u32;
        let mut timed_out = false;
        for case in cases {
            if Instant::now() >= deadline {
                timed_out = true;
                break;
            }
            executed += 1;
            match self.run_single(case, deadline, &[])?.status {
                SingleStatus::Passed => {}
                SingleStatus::Failed => failed.push(case.id.clone()),
                SingleStatus::TimedOut => {
                    timed_out = true;
                    break;
                }
            }
        }
        let status = if timed_out {
            RunStatus::TimedOut
        } else if failed.is_empty() {
            RunStatus::AllPassed
        } else {
            RunStatus::SomeFailed
        };
        Ok(TestRunResult {
            status,
            failed_tests: failed,
            executed_test_count: executed,
            wall_time: start.elapsed(),
            diagnostics: None,
        })
    }

    /// Run the whole suite serially: build the test targets, then run each
    /// binary in order, parsing its standard test-report output for failed
    /// test ids (prefixed with the binary's target name).
    pub fn run_full_suite(&self, timeout: Duration) -> Result<TestRunResult, RunnerError> {
        let start = Instant::now();
        let deadline = start + timeout;
        let binaries = match self.build_tests(timeout)? {
            BuildOutcome::Built(b) => b,
            BuildOutcome::Failed { diagnostics } => {
                return Ok(TestRunResult {
                    status: RunStatus::RunError,
                    failed_tests: Vec::new(),
                    executed_test_count: 0,
                    wall_time: start.elapsed(),
                    diagnostics: Some(diagnostics),
                });
            }
        };

        let mut executed = 0u32;
        let mut failed = Vec::new();
        let mut timed_out = false;
        for binary in &binaries {
            let mut cmd = Command::new(&binary.executable);
            cmd.args(["--test-threads", "1"])
                .current_dir(&self.project_root)
                .env_remove(COV_OUT_ENV)
                .stdin(Stdio::null());
            let out = run_with_deadline(cmd, &binary.target_name, deadline)?;
            if out.timed_out {
                timed_out = true;
                break;
            }
            for line in out.stdout.lines() {
                let Some(rest) = line.trim_start().strip_prefix("test ") else {
                    continue;
                };
                if let Some(name) = rest.strip_suffix(" ... ok") {
                    if !name.contains(' ') {
                        executed += 1;
                    }
                } else if let Some(name) = rest.strip_suffix(" ... FAILED") {
                    if !name.contains(' ') {
                        executed += 1;
                        failed.push(format!("{}::{name}", binary.target_name));
                    }
                }
            }
        }

        let status = if timed_out {
            RunStatus::TimedOut
        } else if failed.is_empty() {
            RunStatus::AllPassed
        } else {
            RunStatus::SomeFailed
        };
        failed.sort();
        Ok(TestRunResult {
            status,
            failed_tests: failed,
            executed_test_count: executed,
            wall_time: start.elapsed(),
            diagnostics: None,
        })
    }
}

/// Run exactly the selected tests (or the full suite) against the project,
/// building first. A build failure comes back as `run_error` with captured
/// diagnostics, distinct from test failures.
pub fn run_tests(
    project_root: &Path,
    target_dir: &Path,
    selection: Option<&[String]>,
    timeout: Duration,
) -> Result<TestRunResult, RunnerError> {
    let runner = CargoRunner::new(project_root, target_dir);
    let start = Instant::now();
    if let Some(ids) = selection {
        if ids.is_empty() {
            return Ok(TestRunResult {
                status: RunStatus::AllPassed,
                failed_tests: Vec::new(),
                executed_test_count: 0,
                wall_time: start.elapsed(),
                diagnostics: None,
            });
        }
    }
    let binaries = match runner.build_tests(timeout.max(Duration::from_secs(60)))? {
        BuildOutcome::Built(b) => b,
        BuildOutcome::Failed { diagnostics } => {
            return Ok(TestRunResult {
                status: RunStatus::RunError,
                failed_tests: Vec::new(),
                executed_test_count: 0,
                wall_time: start.elapsed(),
                diagnostics: Some(diagnostics),
            });
        }
    };
    match selection {
        None => runner.run_full_suite(timeout),
        Some(ids) => {
            let all = runner.list_tests(&binaries)?;
            let selected: Vec<TestCase> =
                all.into_iter().filter(|c| ids.iter().any(|id| id == &c.id)).collect();
            let mut result = runner.run_selected(&selected, timeout)?;
            result.wall_time = start.elapsed();
            Ok(result)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingleStatus {
    Passed,
    Failed,
    TimedOut,
}

#[derive(Debug)]
pub struct SingleRun {
    pub status: SingleStatus,
    pub wall_time: Duration,
    pub output: String,
}

fn disambiguate_targets(binaries: &mut [TestBinary]) {
    for i in 1..binaries.len() {
        let taken = binaries[..i]
            .iter()
            .any(|b| b.target_name == binaries[i].target_name);
        if taken {
            let n = i + 1;
            binaries[i].target_name = format!("{}#{n}", binaries[i].target_name);
        }
    }
}

struct CommandOutput {
    status_success: bool,
    timed_out: bool,
    stdout: String,
    stderr: String,
}

impl CommandOutput {
    fn success(&self) -> bool {
        self.status_success && !self.timed_out
    }
}

fn tail(text: &str, max: usize) -> String {
    if text.len() <= max {
        text.to_string()
    } else {
        let cut = text.len() - max;
        let cut = (cut..text.len()).find(|i| text.is_char_boundary(*i)).unwrap_or(cut);
        format!("...{}", &text[cut..])
    }
}

/// Spawn, drain both pipes on reader threads, kill at the deadline.
fn run_with_deadline(
    mut cmd: Command,
    what: &str,
    deadline: Instant,
) -> Result<CommandOutput, RunnerError> {
    cmd.stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd
        .spawn()
        .map_err(|source| RunnerError::Spawn { what: what.to_string(), source })?;
    let stdout = drain(child.stdout.take());
    let stderr = drain(child.stderr.take());

    let mut timed_out = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if Instant::now() >= deadline {
                    timed_out = true;
                    kill_and_wait(&mut child);
                    break child
                        .wait()
                        .map_err(|source| RunnerError::Io { what: what.to_string(), source })?;
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(source) => {
                kill_and_wait(&mut child);
                return Err(RunnerError::Io { what: what.to_string(), source });
            }
        }
    };

    let stdout = stdout.join().unwrap_or_default();
    let stderr = stderr.join().unwrap_or_default();
    Ok(CommandOutput { status_success: status.success(), timed_out, stdout, stderr })
}

fn kill_and_wait(child: &mut Child) {
    let _ = child.kill();
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = String::new();
        if let Some(mut pipe) = pipe {
            let mut bytes = Vec::new();
            let _ = pipe.read_to_end(&mut bytes);
            buf = String::from_utf8_lossy(&bytes).into_owned();
        }
        buf
    })
}
