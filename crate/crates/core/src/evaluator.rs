//! Staged evaluation of one point: unrelaxable a priori constraints, then
//! relaxable a priori constraints, then simulations.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use thiserror::Error;

use crate::problem::{format_value, Constraint, ExprTest, Measure, Objective, ProblemInstance, SetSpec};
use crate::sim::interpret::result_from_value;
use crate::sim::{interpret_outcome, objective_value, ConstraintResult, EvalResult, Harness, HarnessError, SimStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// An unrelaxable a priori constraint failed; no simulation ran.
    RejectedAPriori,
    /// A relaxable a priori constraint failed and the policy skips simulations then.
    SimulationSkipped,
    Simulated,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::RejectedAPriori => "RejectedAPriori",
            Stage::SimulationSkipped => "SimulationSkipped",
            Stage::Simulated => "Simulated",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalPolicy {
    /// Skip simulations when a relaxable a priori constraint is violated.
    pub skip_sim_on_relaxable_apriori: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimCall {
    pub simulation: String,
    pub status: SimStatus,
    pub transcript: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointEvaluation {
    pub x: Vec<f64>,
    pub stage: Stage,
    pub results: Vec<EvalResult>,
    /// Extended value: `+inf` under the extreme barrier.
    pub f: f64,
    /// Sum of squared violations of quantifiable relaxable constraints.
    pub h: f64,
    /// Violated relaxable constraints without a violation measure.
    pub n_viol_nonquant: usize,
    pub hidden_event: bool,
    /// An unrelaxable constraint failed or a result needed for feasibility is unknown.
    pub unrelaxable_violated: bool,
    pub sim_calls_used: usize,
    pub sims: Vec<SimCall>,
}

impl PointEvaluation {
    /// Rejected by the extreme barrier.
    pub fn is_barrier(&self) -> bool {
        self.f == f64::INFINITY || self.unrelaxable_violated || self.hidden_event || self.stage != Stage::Simulated
    }

    pub fn is_feasible(&self) -> bool {
        !self.is_barrier() && self.h == 0.0 && self.n_viol_nonquant == 0
    }

    pub fn result(&self, name: &str) -> Option<&ConstraintResult> {
        self.results.iter().find_map(|r| match r {
            EvalResult::Constraint { name: n, result } if n == name => Some(result),
            _ => None,
        })
    }

    pub fn hidden_reasons(&self) -> impl Iterator<Item = (&str, &str)> {
        self.results.iter().filter_map(|r| match r {
            EvalResult::HiddenEvent { simulation, reason } => Some((simulation.as_str(), reason.as_str())),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationFault {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("point has {got} values, instance has {expected} variables")]
    Dimension { expected: usize, got: usize },
}

/// Result of an a priori constraint at `x`.
pub(crate) fn a_priori_result(instance: &ProblemInstance, c: &Constraint, x: &[f64]) -> ConstraintResult {
    let Some(expr) = c.a_priori_expr() else {
        return ConstraintResult::Unknown(format!("{} is not a priori", c.name));
    };
    if let crate::problem::ConstraintBody::APriori { test: ExprTest::Member(SetSpec::Labels(labels)), .. } = &c.body {
        let label = expr
            .as_variable()
            .and_then(|v| instance.variable_index(&v))
            .and_then(|i| instance.variables[i].label(x[i]));
        return match label {
            Some(l) => ConstraintResult::Boolean(labels.iter().any(|m| m == l)),
            None => ConstraintResult::Unknown(format!("{}: no label at this point", c.name)),
        };
    }
    match expr.eval(&instance.env(x)) {
        Ok(v) => result_from_value(c, v),
        Err(e) => ConstraintResult::Unknown(e.to_string()),
    }
}

#[derive(Default)]
struct Tally {
    h_terms: Vec<f64>,
    n_viol_nonquant: usize,
    unrelaxable_violated: bool,
    relaxable_violated: bool,
}

impl Tally {
    fn account(&mut self, c: &Constraint, r: &ConstraintResult) {
        if !c.class.is_relaxable() {
            if r.satisfied() != Some(true) {
                self.unrelaxable_violated = true;
            }
            return;
        }
        match r {
            ConstraintResult::Unknown(_) => self.unrelaxable_violated = true,
            ConstraintResult::Quantified(v) if !v.feasible => {
                self.relaxable_violated = true;
                match v.violation {
                    Measure::Quantified(viol) => self.h_terms.push(viol * viol),
                    Measure::Unquantified => self.n_viol_nonquant += 1,
                }
            }
            ConstraintResult::Boolean(false) => {
                self.relaxable_violated = true;
                self.n_viol_nonquant += 1;
            }
            _ => {}
        }
    }

    fn h(&self) -> f64 {
        let mut terms = self.h_terms.clone();
        terms.sort_by(f64::total_cmp);
        terms.iter().fold(0.0, |acc, t| acc + t)
    }
}

fn objective_expr(instance: &ProblemInstance, x: &[f64]) -> f64 {
    match &instance.objective {
        Objective::Expr(e) => e.eval(&instance.env(x)).unwrap_or(f64::INFINITY),
        Objective::Sim { .. } => f64::INFINITY,
    }
}

/// Simulations needed to evaluate the instance, in declaration order.
pub fn required_simulations(instance: &ProblemInstance) -> Vec<&str> {
    instance
        .simulations
        .iter()
        .map(|s| s.id.as_str())
        .filter(|id| {
            matches!(&instance.objective, Objective::Sim { simulation, .. } if simulation == id)
                || instance.constraints_of_simulation(id).next().is_some()
        })
        .collect()
}

/// Evaluates `x` stage by stage.
///
/// A failed unrelaxable a priori constraint stops before any simulation. Once
/// a simulation triggers the extreme barrier the remaining ones are skipped.
pub fn evaluate_point(
    instance: &ProblemInstance,
    harness: &Harness,
    x: &[f64],
    policy: EvalPolicy,
) -> Result<PointEvaluation, EvaluationFault> {
    if x.len() != instance.dimension() {
        return Err(EvaluationFault::Dimension { expected: instance.dimension(), got: x.len() });
    }
    let mut tally = Tally::default();
    let mut results = Vec::new();
    let mut eval = PointEvaluation {
        x: x.to_vec(),
        stage: Stage::Simulated,
        results: Vec::new(),
        f: f64::INFINITY,
        h: 0.0,
        n_viol_nonquant: 0,
        hidden_event: false,
        unrelaxable_violated: false,
        sim_calls_used: 0,
        sims: Vec::new(),
    };

    for relaxable in [false, true] {
        for c in instance
            .constraints
            .iter()
            .filter(|c| c.class.is_a_priori() && c.class.is_relaxable() == relaxable)
        {
            let r = a_priori_result(instance, c, x);
            tally.account(c, &r);
            results.push(EvalResult::Constraint { name: c.name.clone(), result: r });
        }
        if tally.unrelaxable_violated {
            eval.stage = Stage::RejectedAPriori;
            break;
        }
    }

    let sims = required_simulations(instance);
    if eval.stage == Stage::Simulated && policy.skip_sim_on_relaxable_apriori && tally.relaxable_violated && !sims.is_empty() {
        eval.stage = Stage::SimulationSkipped;
    }

    let mut objective_from_sim = None;
    if eval.stage == Stage::Simulated {
        let payload = instance.serialize_point(x);
        for id in sims {
            let spec = instance.simulation(id).expect("validated binding");
            let outcome = harness.cached_evaluate(spec, &payload)?;
            eval.sim_calls_used += 1;
            eval.sims.push(SimCall {
                simulation: id.to_string(),
                status: outcome.status,
                transcript: outcome.transcript.clone(),
            });
            for r in interpret_outcome(&outcome, spec, instance) {
                match &r {
                    EvalResult::Constraint { name, result } => {
                        tally.account(instance.constraint(name).expect("bound constraint"), result)
                    }
                    EvalResult::HiddenEvent { .. } => eval.hidden_event = true,
                }
                results.push(r);
            }
            if let Objective::Sim { simulation, index } = &instance.objective {
                if simulation == id {
                    objective_from_sim = Some(objective_value(&outcome, *index));
                }
            }
            if outcome.status != SimStatus::Completed || eval.hidden_event || tally.unrelaxable_violated {
                break;
            }
        }
    }

    eval.results = results;
    eval.h = tally.h();
    eval.n_viol_nonquant = tally.n_viol_nonquant;
    eval.unrelaxable_violated = tally.unrelaxable_violated;
    let sims_ok = eval.sims.iter().all(|s| s.status == SimStatus::Completed);
    if eval.stage == Stage::Simulated && sims_ok && !eval.hidden_event && !eval.unrelaxable_violated {
        eval.f = match &instance.objective {
            Objective::Expr(_) => objective_expr(instance, x),
            Objective::Sim { .. } => objective_from_sim.unwrap_or(f64::INFINITY),
        };
    }
    Ok(eval)
}

/// Whether `eval` may be reported as a solution: unrelaxable constraints hold,
/// relaxable ones hold within their declared tolerance, and nothing hidden fired.
pub fn is_acceptable_solution(eval: &PointEvaluation, instance: &ProblemInstance) -> bool {
    if eval.is_barrier() || !eval.f.is_finite() {
        return false;
    }
    instance.constraints.iter().all(|c| {
        let Some(r) = eval.result(&c.name) else { return false };
        if !c.class.is_relaxable() {
            return r.satisfied() == Some(true);
        }
        match r {
            ConstraintResult::Quantified(v) => {
                v.feasible || matches!(v.violation, Measure::Quantified(viol) if viol <= c.tolerance.unwrap_or(0.0))
            }
            ConstraintResult::Boolean(b) => *b,
            ConstraintResult::Unknown(_) => false,
        }
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimSavings {
    pub points_evaluated: usize,
    pub rejected_a_priori: usize,
    pub simulations_executed: u64,
}

/// Counts points, a priori rejections, and true simulation executions.
pub fn sim_savings<'a>(evals: impl IntoIterator<Item = &'a PointEvaluation>, harness: &Harness) -> SimSavings {
    let mut s = SimSavings { simulations_executed: harness.counters().executions, ..SimSavings::default() };
    for e in evals {
        s.points_evaluated += 1;
        if e.stage == Stage::RejectedAPriori {
            s.rejected_a_priori += 1;
        }
    }
    s
}

pub const LOG_HEADER: [&str; 9] = [
    "ordinal",
    "stage",
    "f",
    "h",
    "n_viol_nonquant",
    "hidden_event",
    "sim_calls_used",
    "sim_status",
    "transcripts",
];

pub(crate) fn log_fields(ordinal: usize, e: &PointEvaluation) -> Vec<String> {
    vec![
        ordinal.to_string(),
        e.stage.to_string(),
        format_value(e.f),
        format_value(e.h),
        e.n_viol_nonquant.to_string(),
        e.hidden_event.to_string(),
        e.sim_calls_used.to_string(),
        e.sims.iter().map(|s| format!("{}={}", s.simulation, s.status)).collect::<Vec<_>>().join(";"),
        // File names only, so logs of identical runs in different directories match.
        e.sims
            .iter()
            .filter_map(|s| s.transcript.as_ref()?.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect::<Vec<_>>()
            .join(";"),
    ]
}

/// Evaluation log: one CSV row per point, numbered from 1.
pub fn write_evaluation_log<'a, W: Write>(
    out: W,
    evals: impl IntoIterator<Item = &'a PointEvaluation>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOG_HEADER)?;
    for (i, e) in evals.into_iter().enumerate() {
        w.write_record(log_fields(i + 1, e))?;
    }
    w.flush()?;
    Ok(())
}
