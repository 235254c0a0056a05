use super::{SimOutcome, SimStatus, SimulationSpec};
use crate::problem::violation::{apply_detail, raw_measure, satisfied};
use crate::problem::{Constraint, ProblemInstance, SimBinding, ViolationInfo};

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintResult {
    Quantified(ViolationInfo),
    /// Satisfaction of a nonquantifiable constraint; no measure exists.
    Boolean(bool),
    /// The value could not be obtained.
    Unknown(String),
}

impl ConstraintResult {
    /// `Some(true)` when satisfied, `Some(false)` when violated, `None` when unknown.
    pub fn satisfied(&self) -> Option<bool> {
        match self {
            ConstraintResult::Quantified(v) => Some(v.feasible),
            ConstraintResult::Boolean(b) => Some(*b),
            ConstraintResult::Unknown(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalResult {
    Constraint { name: String, result: ConstraintResult },
    /// A hidden (NUSH) constraint was violated; it carries no measure.
    HiddenEvent { simulation: String, reason: String },
}

/// Result of a constraint from the numeric value its binding reads.
pub(crate) fn result_from_value(c: &Constraint, value: f64) -> ConstraintResult {
    let shape = c.shape();
    match c.effective_detail() {
        Some(detail) => match raw_measure(&shape, value) {
            Some((feasible, violation, margin)) => {
                ConstraintResult::Quantified(apply_detail(detail, feasible, violation, margin))
            }
            None => ConstraintResult::Boolean(satisfied(&shape, value).unwrap_or(false)),
        },
        None => match satisfied(&shape, value) {
            Some(b) => ConstraintResult::Boolean(b),
            None => ConstraintResult::Unknown(format!("{} has no value to test", c.name)),
        },
    }
}

fn result(c: &Constraint, r: ConstraintResult) -> EvalResult {
    EvalResult::Constraint { name: c.name.clone(), result: r }
}

/// Maps one simulation outcome to the constraints bound to that simulation.
pub fn interpret_outcome(outcome: &SimOutcome, spec: &SimulationSpec, instance: &ProblemInstance) -> Vec<EvalResult> {
    let bound: Vec<&Constraint> = instance.constraints_of_simulation(&spec.id).collect();
    let hidden = |reason: String| vec![EvalResult::HiddenEvent { simulation: spec.id.clone(), reason }];
    match outcome.status {
        SimStatus::Crashed => hidden(match outcome.exit {
            Some(exit) => format!("crashed with {exit}"),
            None => "crashed".into(),
        }),
        SimStatus::TimedOut => {
            let violated_timers: Vec<EvalResult> = bound
                .iter()
                .filter(|c| matches!(c.sim_binding(), Some(SimBinding::Elapsed { .. })))
                .map(|c| (c, result_from_value(c, outcome.elapsed_secs)))
                .filter(|(_, r)| r.satisfied() == Some(false))
                .map(|(c, r)| result(c, r))
                .collect();
            if violated_timers.is_empty() {
                return hidden(format!("timed out after {:.3} s", outcome.elapsed_secs));
            }
            let mut out = violated_timers;
            for c in bound.iter().filter(|c| matches!(c.sim_binding(), Some(SimBinding::Output { .. }))) {
                out.push(result(c, ConstraintResult::Unknown("simulation timed out".into())));
            }
            out
        }
        SimStatus::ErrorCode(code) => bound
            .iter()
            .map(|c| {
                let r = match c.sim_binding() {
                    Some(SimBinding::ExitCode { code: own, .. }) => ConstraintResult::Boolean(*own != code),
                    Some(SimBinding::Elapsed { .. }) => result_from_value(c, outcome.elapsed_secs),
                    _ => ConstraintResult::Unknown(format!("no outputs: exited with documented code {code}")),
                };
                result(c, r)
            })
            .collect(),
        SimStatus::Completed | SimStatus::PartialOutputs => bound
            .iter()
            .map(|c| {
                let r = match c.sim_binding() {
                    Some(SimBinding::Output { index, .. }) => match outcome.outputs.get(*index).copied().flatten() {
                        Some(v) if !v.is_nan() => result_from_value(c, v),
                        Some(_) => ConstraintResult::Unknown(format!("output {index} is NaN")),
                        None => ConstraintResult::Unknown(format!("output {index} is missing")),
                    },
                    Some(SimBinding::Elapsed { .. }) => result_from_value(c, outcome.elapsed_secs),
                    Some(SimBinding::ExitCode { .. }) => ConstraintResult::Boolean(true),
                    None => unreachable!("constraints_of_simulation yields simulation constraints"),
                };
                result(c, r)
            })
            .collect(),
    }
}

/// Objective read from output `index`; `+inf` unless the run completed.
pub fn objective_value(outcome: &SimOutcome, index: usize) -> f64 {
    match (outcome.status, outcome.output(index)) {
        (SimStatus::Completed, Some(v)) => v,
        _ => f64::INFINITY,
    }
}
