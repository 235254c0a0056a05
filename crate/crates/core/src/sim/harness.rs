use std::collections::HashMap;
use std::io::{Read, Write};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::{classify_run, timed_out, ExitKind, Invocation, RawRun, SimOutcome, SimulationSpec};

/// In-process black box: receives the wire text of the point.
pub type SimFn = Arc<dyn Fn(&str) -> RawRun + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("cannot start simulation {sim}: {reason}")]
    SpawnFailure { sim: String, reason: String },
    #[error("simulation {sim}: no in-process function named {name:?}")]
    UnknownFunction { sim: String, name: String },
    #[error("cannot write transcript {path}: {reason}")]
    Transcript { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HarnessCounters {
    pub requests: u64,
    pub cache_hits: u64,
    pub executions: u64,
}

type Slot = Arc<OnceLock<Result<SimOutcome, HarnessError>>>;

/// Runs simulations, caching outcomes by exact point text.
///
/// Shared references are enough for concurrent use: each cache key is executed
/// at most once, and later callers wait for that run.
#[derive(Default)]
pub struct Harness {
    functions: HashMap<String, SimFn>,
    cache: Mutex<HashMap<(String, String), Slot>>,
    requests: AtomicU64,
    hits: AtomicU64,
    executions: AtomicU64,
    transcript_dir: Option<PathBuf>,
    working_dir: Option<PathBuf>,
}

impl Harness {
    pub fn new() -> Self {
        Self::default()
    }

    /// Persists one transcript per execution under `dir`.
    pub fn with_transcripts(mut self, dir: impl Into<PathBuf>) -> Self {
        self.transcript_dir = Some(dir.into());
        self
    }

    /// Directory external commands run in.
    pub fn with_working_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.working_dir = Some(dir.into());
        self
    }

    pub fn register(&mut self, name: impl Into<String>, f: impl Fn(&str) -> RawRun + Send + Sync + 'static) {
        self.functions.insert(name.into(), Arc::new(f));
    }

    pub fn counters(&self) -> HarnessCounters {
        HarnessCounters {
            requests: self.requests.load(Ordering::SeqCst),
            cache_hits: self.hits.load(Ordering::SeqCst),
            executions: self.executions.load(Ordering::SeqCst),
        }
    }

    /// Executes `spec` on `payload` (the wire text of the point), bypassing the cache.
    pub fn run_simulation(&self, spec: &SimulationSpec, payload: &str) -> Result<SimOutcome, HarnessError> {
        let start = Instant::now();
        let timeout = Duration::from_secs_f64(spec.timeout_secs);
        let (outcome, run) = match &spec.invocation {
            Invocation::InProcess(name) => {
                let f = self
                    .functions
                    .get(name)
                    .ok_or_else(|| HarnessError::UnknownFunction { sim: spec.id.clone(), name: name.clone() })?;
                let run = f(payload);
                let elapsed = start.elapsed();
                if elapsed > timeout {
                    (timed_out(spec, elapsed.as_secs_f64()), Some(run))
                } else {
                    (classify_run(spec, &run, elapsed.as_secs_f64()), Some(run))
                }
            }
            Invocation::Command(argv) => run_command(spec, argv, self.working_dir.as_deref(), payload, timeout, start)?,
        };
        let ordinal = self.executions.fetch_add(1, Ordering::SeqCst) + 1;
        let mut outcome = outcome;
        if let Some(dir) = &self.transcript_dir {
            outcome.transcript = Some(write_transcript(dir, ordinal, spec, payload, &outcome, run.as_ref())?);
        }
        Ok(outcome)
    }

    /// Cached execution: byte-identical payloads for the same simulation run once.
    pub fn cached_evaluate(&self, spec: &SimulationSpec, payload: &str) -> Result<SimOutcome, HarnessError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let key = (spec.id.clone(), payload.to_string());
        let (slot, fresh) = {
            let mut cache = self.cache.lock().expect("cache lock poisoned");
            match cache.get(&key) {
                Some(slot) => (Arc::clone(slot), false),
                None => {
                    let slot: Slot = Arc::default();
                    cache.insert(key, Arc::clone(&slot));
                    (slot, true)
                }
            }
        };
        if !fresh {
            self.hits.fetch_add(1, Ordering::SeqCst);
        }
        slot.get_or_init(|| self.run_simulation(spec, payload)).clone()
    }
}

fn run_command(
    spec: &SimulationSpec,
    argv: &[String],
    working_dir: Option<&Path>,
    payload: &str,
    timeout: Duration,
    start: Instant,
) -> Result<(SimOutcome, Option<RawRun>), HarnessError> {
    let spawn_err = |e: std::io::Error| HarnessError::SpawnFailure { sim: spec.id.clone(), reason: e.to_string() };
    let (program, args) = argv
        .split_first()
        .ok_or_else(|| HarnessError::SpawnFailure { sim: spec.id.clone(), reason: "empty command".into() })?;
    let mut command = Command::new(program);
    if let Some(dir) = working_dir {
        command.current_dir(dir);
    }
    let mut child = command
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0)
        .spawn()
        .map_err(spawn_err)?;

    // A black box that exits without reading its input closes the pipe; that is not a harness fault.
    if let Some(mut stdin) = child.stdin.take() {
        let _ = stdin.write_all(payload.as_bytes());
    }
    let stdout = drain(child.stdout.take());
    let stderr = drain(child.stderr.take());

    let status = loop {
        match child.try_wait().map_err(spawn_err)? {
            Some(status) => break Some(status),
            None if start.elapsed() >= timeout => {
                kill_group(&mut child);
                break None;
            }
            None => thread::sleep(Duration::from_millis(2)),
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let stdout = stdout.join().unwrap_or_default();
    let stderr = stderr.join().unwrap_or_default();
    let Some(status) = status else {
        let run = RawRun { exit: ExitKind::Signal(libc::SIGKILL), stdout, stderr };
        return Ok((timed_out(spec, elapsed), Some(run)));
    };
    let exit = match (status.code(), status.signal()) {
        (Some(c), _) => ExitKind::Code(c),
        (None, Some(s)) => ExitKind::Signal(s),
        (None, None) => ExitKind::Signal(0),
    };
    let run = RawRun { exit, stdout, stderr };
    Ok((classify_run(spec, &run, elapsed), Some(run)))
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

fn kill_group(child: &mut Child) {
    let pid = child.id() as libc::pid_t;
    // SAFETY: kill(2) has no memory-safety preconditions; the group id is the child's pid.
    unsafe {
        libc::kill(-pid, libc::SIGKILL);
    }
    let _ = child.kill();
    let _ = child.wait();
}

fn write_transcript(
    dir: &Path,
    ordinal: u64,
    spec: &SimulationSpec,
    payload: &str,
    outcome: &SimOutcome,
    run: Option<&RawRun>,
) -> Result<PathBuf, HarnessError> {
    let path = dir.join(format!("eval_{ordinal:06}_{}.txt", spec.id));
    let err = |e: std::io::Error| HarnessError::Transcript { path: path.clone(), reason: e.to_string() };
    std::fs::create_dir_all(dir).map_err(err)?;
    let mut text = format!(
        "simulation: {}\nstatus: {}\nexit: {}\nelapsed_secs: {}\n--- input\n{payload}",
        spec.id,
        outcome.status,
        outcome.exit.map_or_else(|| "killed on timeout".to_string(), |e| e.to_string()),
        outcome.elapsed_secs,
    );
    if let Some(run) = run {
        text.push_str(&format!("--- stdout\n{}\n--- stderr\n{}\n", run.stdout, run.stderr));
    }
    std::fs::write(&path, text).map_err(err)?;
    Ok(path)
}
