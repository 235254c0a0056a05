//! Black-box simulations: specifications, raw outcomes and their meaning for
//! the constraints bound to them.

mod harness;
pub(crate) mod interpret;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

pub use harness::{Harness, HarnessCounters, HarnessError, SimFn};
pub use interpret::{interpret_outcome, objective_value, ConstraintResult, EvalResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    /// Program and arguments; the point is written to standard input.
    Command(Vec<String>),
    /// Name of a function registered with the harness.
    InProcess(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub id: String,
    pub invocation: Invocation,
    pub timeout_secs: f64,
    pub outputs: usize,
    /// Documented exit codes, each naming the constraint it reports.
    pub error_codes: BTreeMap<i32, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Code(i32),
    Signal(i32),
}

impl fmt::Display for ExitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExitKind::Code(c) => write!(f, "exit code {c}"),
            ExitKind::Signal(s) => write!(f, "signal {s}"),
        }
    }
}

/// What a finished run produced, before interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRun {
    pub exit: ExitKind,
    pub stdout: String,
    pub stderr: String,
}

impl RawRun {
    pub fn success(stdout: impl Into<String>) -> Self {
        RawRun { exit: ExitKind::Code(0), stdout: stdout.into(), stderr: String::new() }
    }

    pub fn code(code: i32, stderr: impl Into<String>) -> Self {
        RawRun { exit: ExitKind::Code(code), stdout: String::new(), stderr: stderr.into() }
    }

    pub fn abort(stderr: impl Into<String>) -> Self {
        RawRun { exit: ExitKind::Signal(libc::SIGABRT), stdout: String::new(), stderr: stderr.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimStatus {
    Completed,
    Crashed,
    TimedOut,
    ErrorCode(i32),
    PartialOutputs,
}

impl fmt::Display for SimStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimStatus::Completed => f.write_str("Completed"),
            SimStatus::Crashed => f.write_str("Crashed"),
            SimStatus::TimedOut => f.write_str("TimedOut"),
            SimStatus::ErrorCode(c) => write!(f, "ErrorCode({c})"),
            SimStatus::PartialOutputs => f.write_str("PartialOutputs"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub status: SimStatus,
    /// One slot per declared output: `None` when missing or unparseable,
    /// `Some(NaN)` when the black box printed `NaN`.
    pub outputs: Vec<Option<f64>>,
    pub elapsed_secs: f64,
    /// `None` for runs killed on timeout.
    pub exit: Option<ExitKind>,
    pub transcript: Option<PathBuf>,
}

impl SimOutcome {
    /// Value of output `index` when present and not NaN.
    pub fn output(&self, index: usize) -> Option<f64> {
        self.outputs.get(index).copied().flatten().filter(|v| !v.is_nan())
    }
}

/// Parses whitespace-separated reals into `arity` slots.
pub fn parse_outputs(stdout: &str, arity: usize) -> Vec<Option<f64>> {
    let mut tokens = stdout.split_whitespace();
    (0..arity)
        .map(|_| {
            tokens.next().and_then(|t| {
                if t.eq_ignore_ascii_case("nan") {
                    Some(f64::NAN)
                } else {
                    t.parse::<f64>().ok()
                }
            })
        })
        .collect()
}

/// Classifies a finished run. Documented exit codes take precedence over the
/// generic crash path.
pub fn classify_run(spec: &SimulationSpec, run: &RawRun, elapsed_secs: f64) -> SimOutcome {
    let (status, outputs) = match run.exit {
        ExitKind::Code(0) => {
            let outputs = parse_outputs(&run.stdout, spec.outputs);
            let complete = outputs.iter().all(|o| o.is_some_and(|v| !v.is_nan()));
            (if complete { SimStatus::Completed } else { SimStatus::PartialOutputs }, outputs)
        }
        ExitKind::Code(c) if spec.error_codes.contains_key(&c) => (SimStatus::ErrorCode(c), vec![None; spec.outputs]),
        _ => (SimStatus::Crashed, vec![None; spec.outputs]),
    };
    SimOutcome { status, outputs, elapsed_secs, exit: Some(run.exit), transcript: None }
}

pub fn timed_out(spec: &SimulationSpec, elapsed_secs: f64) -> SimOutcome {
    SimOutcome {
        status: SimStatus::TimedOut,
        outputs: vec![None; spec.outputs],
        elapsed_secs,
        exit: None,
        transcript: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(outputs: usize) -> SimulationSpec {
        SimulationSpec {
            id: "s".into(),
            invocation: Invocation::InProcess("x".into()),
            timeout_secs: 1.0,
            outputs,
            error_codes: BTreeMap::from([(3, "diverged".to_string())]),
        }
    }

    #[test]
    fn statuses() {
        let s = spec(2);
        assert_eq!(classify_run(&s, &RawRun::success("1 2\n"), 0.0).status, SimStatus::Completed);
        assert_eq!(classify_run(&s, &RawRun::success("1 NaN"), 0.0).status, SimStatus::PartialOutputs);
        assert_eq!(classify_run(&s, &RawRun::success("1"), 0.0).status, SimStatus::PartialOutputs);
        assert_eq!(classify_run(&s, &RawRun::success("1 oops"), 0.0).status, SimStatus::PartialOutputs);
        assert_eq!(classify_run(&s, &RawRun::code(3, ""), 0.0).status, SimStatus::ErrorCode(3));
        assert_eq!(classify_run(&s, &RawRun::code(7, ""), 0.0).status, SimStatus::Crashed);
        assert_eq!(classify_run(&s, &RawRun::abort(""), 0.0).status, SimStatus::Crashed);
    }

    #[test]
    fn nan_is_kept_distinct_from_missing() {
        let out = classify_run(&spec(3), &RawRun::success("NaN 4"), 0.0);
        assert!(out.outputs[0].unwrap().is_nan());
        assert_eq!(out.outputs[1], Some(4.0));
        assert_eq!(out.outputs[2], None);
        assert_eq!(out.output(0), None);
    }
}
