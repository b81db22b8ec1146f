//! Differential execution harness.
//!
//! Reference and candidate are each compiled into the same synthesized
//! driver, run in private scratch directories under resource ceilings, and
//! compared observation by observation. The reference is the only oracle;
//! test cases never store expected values.

mod driver;
mod limits;
pub mod sandbox;
mod verdict;

use std::collections::HashMap;
use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;
use rand::Rng;
use tempfile::TempDir;
use thiserror::Error;

use crate::bank::{SignatureDescriptor, TestCase};
use crate::sync::FifoSemaphore;
use crate::text::truncate_bytes;

pub use driver::{
    c_string_literal, parse_observations, synthesize_driver, Driver, DriverError, NONCE_ENV,
    STRING_CLOSE, STRING_OPEN,
};
pub use limits::ResourceLimits;
pub use sandbox::DIAGNOSTIC_BYTES;
pub use verdict::{CaseResult, Verdict, VerdictKind};

use sandbox::{run_limited, signal_name, ChildLimits};

pub const SCRATCH_ENV: &str = "EIPE_SCRATCH_DIR";

/// Placeholder for a case that produced no output at all.
pub const NO_OUTPUT: &str = "<no output>";

/// Failures of the harness itself. These are never shown to a student as a
/// verdict.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no C compiler found (tried {0})")]
    ToolchainMissing(String),
    #[error("no toolchain for language `{0}`")]
    UnsupportedLanguage(String),
    #[error("invalid resource limits: {0}")]
    InvalidLimits(String),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("reference implementation failed: {0}")]
    Reference(String),
    #[error("harness i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    /// Compiler executable; probed from `$CC`, `cc`, `gcc`, `clang` when unset.
    pub compiler: Option<PathBuf>,
    /// Defaults to `$EIPE_SCRATCH_DIR`, then `<tmp>/eipe-scratch`.
    pub scratch_root: Option<PathBuf>,
    pub limits: ResourceLimits,
    /// Concurrent compile/run jobs; defaults to the CPU count.
    pub workers: Option<usize>,
    pub isolate_network: bool,
    /// Unprivileged identity for runs when the service itself is root.
    pub run_as: Option<(u32, u32)>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            compiler: None,
            scratch_root: None,
            limits: ResourceLimits::default(),
            workers: None,
            isolate_network: true,
            run_as: Some((65534, 65534)),
        }
    }
}

/// A compiled program, owning its scratch directory.
#[derive(Debug)]
pub struct BuildArtifact {
    dir: TempDir,
    exe: PathBuf,
    case_count: usize,
}

impl BuildArtifact {
    pub fn path(&self) -> &Path {
        &self.exe
    }

    pub fn scratch_dir(&self) -> &Path {
        self.dir.path()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileFailure {
    pub diagnostics: String,
    pub timed_out: bool,
}

#[derive(Debug)]
pub enum CompileOutcome {
    Built(BuildArtifact),
    Failed(CompileFailure),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Exited(i32),
    Signaled(i32),
    TimedOut,
    OutputLimit,
}

#[derive(Debug, Clone)]
pub struct ExecutionRecord {
    /// Canonical observation per case, `None` when the case printed nothing.
    pub observations: Vec<Option<String>>,
    pub stdout_bytes: usize,
    pub stderr: String,
    pub status: RunStatus,
    pub elapsed: Duration,
}

impl ExecutionRecord {
    pub fn truncated(&self) -> bool {
        self.status == RunStatus::OutputLimit
    }

    pub fn clean(&self) -> bool {
        self.status == RunStatus::Exited(0)
    }

    /// Index of the first case without output, if any.
    pub fn first_missing_case(&self) -> Option<usize> {
        self.observations.iter().position(Option::is_none)
    }
}

#[derive(Debug)]
pub enum SourceRun {
    CompileFailed(CompileFailure),
    Ran(ExecutionRecord),
}

pub struct Harness {
    compiler: PathBuf,
    scratch_root: PathBuf,
    limits: ResourceLimits,
    pool: FifoSemaphore,
    isolate_network: bool,
    run_as: Option<(u32, u32)>,
    reference_cache: Mutex<HashMap<String, Arc<Vec<String>>>>,
}

impl std::fmt::Debug for Harness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Harness")
            .field("compiler", &self.compiler)
            .field("scratch_root", &self.scratch_root)
            .field("limits", &self.limits)
            .field("workers", &self.pool.capacity())
            .finish()
    }
}

fn probe_compiler() -> Result<PathBuf, HarnessError> {
    let mut tried = Vec::new();
    let env_cc = std::env::var("CC").ok().filter(|s| !s.is_empty());
    for name in env_cc.iter().map(String::as_str).chain(["cc", "gcc", "clang"]) {
        tried.push(name.to_string());
        let ok = Command::new(name)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success());
        if ok {
            return Ok(PathBuf::from(name));
        }
    }
    Err(HarnessError::ToolchainMissing(tried.join(", ")))
}

impl Harness {
    /// Builds a harness, checking the toolchain and scratch root up front.
    pub fn new(config: HarnessConfig) -> Result<Self, HarnessError> {
        config.limits.check().map_err(HarnessError::InvalidLimits)?;
        let compiler = match config.compiler {
            Some(c) => {
                let ok = Command::new(&c)
                    .arg("--version")
                    .output()
                    .is_ok_and(|o| o.status.success());
                if !ok {
                    return Err(HarnessError::ToolchainMissing(c.display().to_string()));
                }
                c
            }
            None => probe_compiler()?,
        };
        let scratch_root = config
            .scratch_root
            .or_else(|| std::env::var_os(SCRATCH_ENV).map(PathBuf::from))
            .unwrap_or_else(|| std::env::temp_dir().join("eipe-scratch"));
        fs::create_dir_all(&scratch_root)?;
        let _ = fs::set_permissions(&scratch_root, fs::Permissions::from_mode(0o711));
        let workers = config.workers.unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        });
        Ok(Self {
            compiler,
            scratch_root,
            limits: config.limits,
            pool: FifoSemaphore::new(workers),
            isolate_network: config.isolate_network,
            run_as: config.run_as,
            reference_cache: Mutex::new(HashMap::new()),
        })
    }

    /// A harness with default configuration.
    pub fn with_defaults() -> Result<Self, HarnessError> {
        Self::new(HarnessConfig::default())
    }

    pub fn limits(&self) -> &ResourceLimits {
        &self.limits
    }

    pub fn scratch_root(&self) -> &Path {
        &self.scratch_root
    }

    pub fn supports(&self, language_tag: &str) -> bool {
        language_tag.eq_ignore_ascii_case("c")
    }

    fn check_language(&self, language_tag: &str) -> Result<(), HarnessError> {
        if self.supports(language_tag) {
            Ok(())
        } else {
            Err(HarnessError::UnsupportedLanguage(language_tag.to_string()))
        }
    }

    /// Compiles `source` against `driver` in a fresh scratch directory.
    pub fn compile(
        &self,
        source: &str,
        driver: &Driver,
        limits: &ResourceLimits,
    ) -> Result<CompileOutcome, HarnessError> {
        let dir = tempfile::Builder::new()
            .prefix("job-")
            .tempdir_in(&self.scratch_root)?;
        fs::set_permissions(dir.path(), fs::Permissions::from_mode(0o711))?;
        fs::write(dir.path().join("prog.c"), driver.translation_unit(source))?;
        let mut cmd = Command::new(&self.compiler);
        cmd.current_dir(dir.path())
            .args(["-std=c11", "-O1", "-o", "prog", "prog.c", "-lm"]);
        let run = run_limited(cmd, limits.compile_timeout, DIAGNOSTIC_BYTES, ChildLimits::NONE)?;
        let diagnostics = truncate_bytes(&String::from_utf8_lossy(&run.stderr), DIAGNOSTIC_BYTES);
        if run.timed_out {
            return Ok(CompileOutcome::Failed(CompileFailure {
                diagnostics: format!(
                    "compilation exceeded {} ms\n{diagnostics}",
                    limits.compile_timeout.as_millis()
                ),
                timed_out: true,
            }));
        }
        if run.exit_code() != Some(0) {
            return Ok(CompileOutcome::Failed(CompileFailure {
                diagnostics,
                timed_out: false,
            }));
        }
        let exe = dir.path().join("prog");
        let work = dir.path().join("work");
        fs::create_dir(&work)?;
        fs::set_permissions(&work, fs::Permissions::from_mode(0o777))?;
        Ok(CompileOutcome::Built(BuildArtifact {
            dir,
            exe,
            case_count: driver.case_count(),
        }))
    }

    /// Runs a built artifact once over all of its cases.
    pub fn execute(
        &self,
        artifact: &BuildArtifact,
        limits: &ResourceLimits,
    ) -> Result<ExecutionRecord, HarnessError> {
        let nonce: String = {
            let mut rng = rand::thread_rng();
            (0..16).map(|_| format!("{:x}", rng.gen::<u8>() & 0xf)).collect()
        };
        let wall = limits.run_cap(artifact.case_count);
        let mut cmd = Command::new(&artifact.exe);
        cmd.current_dir(artifact.dir.path().join("work"))
            .env_clear()
            .env("PATH", "/usr/bin:/bin")
            .env(NONCE_ENV, &nonce);
        let child_limits = ChildLimits {
            memory_bytes: Some(limits.memory_bytes),
            cpu_seconds: Some(wall.as_secs() + 1),
            file_size_bytes: Some(1 << 20),
            max_processes: Some(64),
            isolate_network: self.isolate_network,
            run_as: self.run_as,
        };
        let run = run_limited(cmd, wall, limits.output_cap(artifact.case_count), child_limits)?;
        let status = if run.truncated {
            RunStatus::OutputLimit
        } else if run.timed_out || run.signal() == Some(libc::SIGXCPU) {
            RunStatus::TimedOut
        } else if let Some(sig) = run.signal() {
            RunStatus::Signaled(sig)
        } else {
            RunStatus::Exited(run.exit_code().unwrap_or(-1))
        };
        Ok(ExecutionRecord {
            observations: parse_observations(&run.stdout, &nonce, artifact.case_count),
            stdout_bytes: run.stdout.len(),
            stderr: truncate_bytes(&String::from_utf8_lossy(&run.stderr), DIAGNOSTIC_BYTES),
            status,
            elapsed: run.elapsed,
        })
    }

    /// Compiles and runs one source under `driver`.
    pub fn run_source(
        &self,
        source: &str,
        driver: &Driver,
        limits: &ResourceLimits,
    ) -> Result<SourceRun, HarnessError> {
        let _permit = self.pool.acquire();
        match self.compile(source, driver, limits)? {
            CompileOutcome::Failed(f) => Ok(SourceRun::CompileFailed(f)),
            CompileOutcome::Built(a) => Ok(SourceRun::Ran(self.execute(&a, limits)?)),
        }
    }

    /// Canonical observations of the reference, one per case.
    pub fn reference_observations(
        &self,
        reference: &str,
        driver: &Driver,
        limits: &ResourceLimits,
    ) -> Result<Arc<Vec<String>>, HarnessError> {
        let key = driver.translation_unit(reference);
        if let Some(hit) = self.reference_cache.lock().get(&key) {
            return Ok(hit.clone());
        }
        let record = match self.run_source(reference, driver, limits)? {
            SourceRun::CompileFailed(f) => {
                return Err(HarnessError::Reference(format!(
                    "does not compile:\n{}",
                    f.diagnostics
                )))
            }
            SourceRun::Ran(r) => r,
        };
        if !record.clean() {
            return Err(HarnessError::Reference(describe_failure(&record, limits)));
        }
        if let Some(i) = record.first_missing_case() {
            return Err(HarnessError::Reference(format!("case {i} produced no output")));
        }
        let obs: Arc<Vec<String>> =
            Arc::new(record.observations.into_iter().map(Option::unwrap_or_default).collect());
        self.reference_cache.lock().insert(key, obs.clone());
        Ok(obs)
    }

    /// Differential judgment of `candidate` against `reference`.
    pub fn judge(
        &self,
        reference: &str,
        candidate: &str,
        sig: &SignatureDescriptor,
        suite: &[TestCase],
        limits: &ResourceLimits,
    ) -> Result<Verdict, HarnessError> {
        limits.check().map_err(HarnessError::InvalidLimits)?;
        let driver = synthesize_driver(sig, suite)?;
        let expected = self.reference_observations(reference, &driver, limits)?;
        let record = match self.run_source(candidate, &driver, limits)? {
            SourceRun::CompileFailed(f) => return Ok(Verdict::compile_error(&f.diagnostics)),
            SourceRun::Ran(r) => r,
        };
        Ok(match record.status {
            RunStatus::Exited(0) => Verdict::from_cases(
                expected
                    .iter()
                    .zip(record.observations)
                    .enumerate()
                    .map(|(i, (exp, act))| {
                        CaseResult::new(i, exp.clone(), act.unwrap_or_else(|| NO_OUTPUT.to_string()))
                    })
                    .collect(),
            ),
            RunStatus::TimedOut => Verdict::timeout(&describe_failure(&record, limits)),
            RunStatus::OutputLimit => Verdict::output_limit(&describe_failure(&record, limits)),
            RunStatus::Exited(_) | RunStatus::Signaled(_) => {
                Verdict::runtime_error(&describe_failure(&record, limits))
            }
        })
    }

    /// [`Harness::judge`] for a language tag, with the harness's own limits.
    pub fn judge_problem(
        &self,
        language_tag: &str,
        reference: &str,
        candidate: &str,
        sig: &SignatureDescriptor,
        suite: &[TestCase],
    ) -> Result<Verdict, HarnessError> {
        self.check_language(language_tag)?;
        self.judge(reference, candidate, sig, suite, &self.limits)
    }
}

fn describe_failure(record: &ExecutionRecord, limits: &ResourceLimits) -> String {
    let what = match record.status {
        RunStatus::Exited(0) => "exited normally".to_string(),
        RunStatus::Exited(code) => format!("exited with status {code}"),
        RunStatus::Signaled(sig) => format!("terminated by signal {sig} ({})", signal_name(sig)),
        RunStatus::TimedOut => format!(
            "exceeded the time limit ({} ms per case)",
            limits.run_timeout_per_case.as_millis()
        ),
        RunStatus::OutputLimit => format!(
            "output limit exceeded ({} bytes per case); output truncated",
            limits.max_output_bytes_per_case
        ),
    };
    let at = record
        .first_missing_case()
        .map(|i| format!(" during case {i}"))
        .unwrap_or_default();
    if record.stderr.is_empty() {
        format!("{what}{at}")
    } else {
        format!("{what}{at}\n{}", record.stderr)
    }
}
