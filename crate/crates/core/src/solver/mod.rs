//! Coordinate direct search with class-dispatched constraint handling.

mod policy;
mod poll;
mod report;

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::evaluator::{a_priori_result, evaluate_point, is_acceptable_solution, EvalPolicy, EvaluationFault, PointEvaluation, Stage};
use crate::problem::{Measure, ProblemInstance};
use crate::sim::{ConstraintResult, EvalResult, Harness};
use crate::taxonomy::ConstraintClass;

pub use policy::{default_policy, treatment_of, PolicyTrace, TraceCounts, Treatment, HIDDEN_ROW};
pub use poll::{next_candidates, Candidate};
pub use report::HISTORY_FIXED_COLUMNS;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Starting point; defaults to a point inside the declared variable bounds.
    pub x0: Option<Vec<f64>>,
    pub delta0: f64,
    pub delta_min: f64,
    /// Cap on the mesh size; defaults to `1024 * delta0`.
    pub delta_max: Option<f64>,
    pub budget_evals: usize,
    /// Cap on true simulation executions.
    pub budget_sims: Option<u64>,
    pub seed: u64,
    /// Evaluate poll points in a seeded random order instead of axis order.
    pub shuffle_poll: bool,
    pub eval_policy: EvalPolicy,
    /// Recover from a start point violating unrelaxable a priori constraints.
    pub restoration: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            x0: None,
            delta0: 1.0,
            delta_min: 1e-7,
            delta_max: None,
            budget_evals: 10_000,
            budget_sims: None,
            seed: 0,
            shuffle_poll: false,
            eval_policy: EvalPolicy::default(),
            restoration: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub x: Vec<f64>,
    pub f: f64,
    pub h: f64,
    pub n_viol: usize,
}

impl Incumbent {
    fn of(e: &PointEvaluation) -> Self {
        Incumbent { x: e.x.clone(), f: e.f, h: e.h, n_viol: e.n_viol_nonquant }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub feasible: Option<Incumbent>,
    pub infeasible: Option<Incumbent>,
    pub delta: f64,
    /// Largest aggregate violation an infeasible point may have to be kept.
    pub h_max: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// New feasible incumbent, or an infeasible point dominating the infeasible incumbent.
    Success,
    /// Only the aggregate violation improved.
    Partial,
    Failure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub outcome: StepOutcome,
    /// Indices into the evaluated batch.
    pub new_feasible: Option<usize>,
    pub new_infeasible: Option<usize>,
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

fn dominates(e: &PointEvaluation, inc: &Incumbent) -> bool {
    let weak = e.f <= inc.f && e.h <= inc.h && e.n_viol_nonquant <= inc.n_viol;
    weak && (e.f < inc.f || e.h < inc.h || e.n_viol_nonquant < inc.n_viol)
}

fn best_by(
    evals: &[PointEvaluation],
    keep: impl Fn(&PointEvaluation) -> bool,
    key: impl Fn(&PointEvaluation) -> (f64, f64, usize),
) -> Option<usize> {
    (0..evals.len()).filter(|&i| keep(&evals[i])).min_by(|&i, &j| {
        let (a, b) = (key(&evals[i]), key(&evals[j]));
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then_with(|| lex(&evals[i].x, &evals[j].x))
    })
}

/// Applies one poll step's evaluations to the state.
///
/// The feasible incumbent moves on a strict decrease of `f`. The infeasible
/// incumbent moves to a point dominating it in `(f, h, n_viol)`, or to a point
/// of smaller `h` (partial success). Points above `h_max` are ignored. Ties go
/// to smaller `n_viol`, then the lexicographically smaller point.
pub fn update_state(state: &SolverState, evals: &[PointEvaluation], delta_max: f64) -> (SolverState, Step) {
    let mut next = state.clone();
    next.iteration += 1;

    let new_feasible = best_by(evals, |e| e.is_feasible(), |e| (e.f, 0.0, 0))
        .filter(|&i| state.feasible.as_ref().is_none_or(|inc| evals[i].f < inc.f));

    let infeasible_ok = |e: &PointEvaluation| !e.is_barrier() && !e.is_feasible() && e.h <= state.h_max;
    let dominating = match &state.infeasible {
        Some(inc) => best_by(evals, |e| infeasible_ok(e) && dominates(e, inc), |e| (e.f, e.h, e.n_viol_nonquant)),
        None => None,
    };
    let improving_h = best_by(
        evals,
        |e| infeasible_ok(e) && state.infeasible.as_ref().is_none_or(|inc| e.h < inc.h),
        |e| (e.h, e.f, e.n_viol_nonquant),
    );
    let new_infeasible = dominating.or(improving_h);

    let outcome = if new_feasible.is_some() || dominating.is_some() {
        StepOutcome::Success
    } else if improving_h.is_some() {
        StepOutcome::Partial
    } else {
        StepOutcome::Failure
    };
    if let Some(i) = new_feasible {
        next.feasible = Some(Incumbent::of(&evals[i]));
    }
    if let Some(i) = new_infeasible {
        next.infeasible = Some(Incumbent::of(&evals[i]));
    }

    let below = evals
        .iter()
        .filter(|e| !e.is_barrier() && e.h > 0.0 && e.h < state.h_max)
        .map(|e| e.h)
        .fold(None, |m: Option<f64>, h| Some(m.map_or(h, |m| m.max(h))));
    if let Some(h) = below {
        next.h_max = h.max(next.infeasible.as_ref().map_or(0.0, |i| i.h));
    }

    next.delta = match outcome {
        StepOutcome::Success => (state.delta * 2.0).min(delta_max),
        StepOutcome::Partial => state.delta,
        StepOutcome::Failure => state.delta / 2.0,
    };
    (next, Step { outcome, new_feasible, new_infeasible })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncumbentKind {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub eval: PointEvaluation,
    /// Set when the point became an incumbent.
    pub incumbent: Option<IncumbentKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MeshConverged,
    EvaluationBudget,
    SimulationBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub f: f64,
    pub h: f64,
    /// 1-based position in the history.
    pub ordinal: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveCounters {
    pub evaluations: usize,
    pub rejected_a_priori: usize,
    pub hidden_events: usize,
    pub sim_requests: u64,
    pub sim_executions: u64,
    pub cache_hits: u64,
    pub iterations: usize,
    pub restoration_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub problem: String,
    pub variable_names: Vec<String>,
    pub best: Option<Solution>,
    pub history: Vec<HistoryRow>,
    pub counters: SolveCounters,
    pub stop: StopReason,
    pub final_delta: f64,
    pub final_h_max: f64,
    pub trace: PolicyTrace,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("infeasible start: {0}")]
    InfeasibleStart(String),
    #[error("invalid start point: {0}")]
    InvalidStart(String),
    #[error(transparent)]
    Evaluation(#[from] EvaluationFault),
}

/// Start point inside the declared bounds: midpoint when both are finite,
/// otherwise the finite bound, otherwise 0.
pub fn default_start(instance: &ProblemInstance) -> Vec<f64> {
    instance
        .variables
        .iter()
        .map(|v| {
            let (lo, hi) = v.domain();
            let x = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => (lo + hi) / 2.0,
                (true, false) => lo,
                (false, true) => hi,
                (false, false) => 0.0,
            };
            if v.kind.is_discrete() {
                x.floor()
            } else {
                x
            }
        })
        .collect()
}

fn why_rejected(e: &PointEvaluation) -> String {
    if let Some((sim, reason)) = e.hidden_reasons().next() {
        return format!("hidden constraint of {sim} ({reason})");
    }
    let failed: Vec<&str> = e
        .results
        .iter()
        .filter_map(|r| match r {
            EvalResult::Constraint { name, result } if result.satisfied() != Some(true) => Some(name.as_str()),
            _ => None,
        })
        .collect();
    if failed.is_empty() {
        format!("objective is {} at the start point", e.f)
    } else {
        format!("{} violated ({})", failed.join(", "), e.stage)
    }
}

struct Run<'a> {
    instance: &'a ProblemInstance,
    harness: &'a Harness,
    opts: &'a SolveOptions,
    history: Vec<HistoryRow>,
    seen: HashMap<Vec<u64>, usize>,
    trace: PolicyTrace,
    base_requests: u64,
    base_executions: u64,
    base_hits: u64,
}

impl Run<'_> {
    fn budget_stop(&self) -> Option<StopReason> {
        if self.history.len() >= self.opts.budget_evals {
            return Some(StopReason::EvaluationBudget);
        }
        let used = self.harness.counters().executions - self.base_executions;
        match self.opts.budget_sims {
            Some(cap) if used >= cap => Some(StopReason::SimulationBudget),
            _ => None,
        }
    }

    /// Evaluates `x` (or reuses an earlier evaluation) and returns its history index.
    fn eval(&mut self, x: &[f64], projected_by: &[String]) -> Result<Result<usize, StopReason>, EvaluationFault> {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(&i) = self.seen.get(&key) {
            return Ok(Ok(i));
        }
        if let Some(stop) = self.budget_stop() {
            return Ok(Err(stop));
        }
        let e = evaluate_point(self.instance, self.harness, x, self.opts.eval_policy)?;
        self.trace_point(&e, projected_by);
        self.history.push(HistoryRow { eval: e, incumbent: None });
        let i = self.history.len() - 1;
        self.seen.insert(key, i);
        Ok(Ok(i))
    }

    fn trace_point(&mut self, e: &PointEvaluation, projected_by: &[String]) {
        for name in projected_by {
            let c = self.instance.constraint(name).expect("bound constraint");
            self.trace.record_fire_only(name, c.class, Treatment::Projection);
        }
        let skipped = e.stage == Stage::SimulationSkipped;
        for r in &e.results {
            match r {
                EvalResult::Constraint { name, result } => {
                    let c = self.instance.constraint(name).expect("declared constraint");
                    let violated = result.satisfied() != Some(true);
                    let mut t = treatment_of(c);
                    if skipped && violated && c.class.is_relaxable() && c.class.is_a_priori() {
                        t = Treatment::StageAPriori;
                    }
                    self.trace.record(name, c.class, t, violated);
                }
                EvalResult::HiddenEvent { .. } => {
                    self.trace.record(HIDDEN_ROW, ConstraintClass::NUSH, Treatment::ExtremeBarrier, true)
                }
            }
        }
    }
}

/// Merit used by restoration: unmeasured failures, then squared violations, of
/// the unrelaxable a priori constraints.
fn restoration_merit(instance: &ProblemInstance, x: &[f64]) -> (usize, f64) {
    let mut count = 0;
    let mut terms = Vec::new();
    for c in instance.constraints.iter().filter(|c| c.class.is_a_priori() && !c.class.is_relaxable()) {
        match a_priori_result(instance, c, x) {
            ConstraintResult::Quantified(v) if !v.feasible => match v.violation {
                Measure::Quantified(m) => terms.push(m * m),
                Measure::Unquantified => count += 1,
            },
            ConstraintResult::Boolean(false) | ConstraintResult::Unknown(_) => count += 1,
            _ => {}
        }
    }
    terms.sort_by(f64::total_cmp);
    (count, terms.iter().sum())
}

/// Coordinate search on the unrelaxable a priori constraints alone; runs no simulation.
fn restore(instance: &ProblemInstance, x0: &[f64], opts: &SolveOptions) -> (Vec<f64>, usize) {
    let better = |a: (usize, f64), b: (usize, f64)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
    let mut state = SolverState {
        feasible: Some(Incumbent { x: x0.to_vec(), f: 0.0, h: 0.0, n_viol: 0 }),
        infeasible: None,
        delta: opts.delta0,
        h_max: f64::INFINITY,
        iteration: 0,
    };
    let mut merit = restoration_merit(instance, x0);
    let mut evals = 0;
    while merit != (0, 0.0) && state.delta >= opts.delta_min && evals < opts.budget_evals {
        let mut best: Option<(Vec<f64>, (usize, f64))> = None;
        for c in next_candidates(&state, instance) {
            evals += 1;
            let m = restoration_merit(instance, &c.x);
            if better(m, best.as_ref().map_or(merit, |b| b.1)) {
                best = Some((c.x, m));
            }
        }
        let inc = state.feasible.as_mut().expect("restoration center");
        match best {
            Some((x, m)) => {
                inc.x = x;
                merit = m;
                state.delta *= 2.0;
            }
            None => state.delta /= 2.0,
        }
    }
    (state.feasible.expect("restoration center").x, evals)
}

/// Minimizes the instance objective over its feasible set.
pub fn solve(instance: &ProblemInstance, harness: &Harness, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let mut x0 = opts.x0.clone().unwrap_or_else(|| default_start(instance));
    if x0.len() != instance.dimension() {
        return Err(SolveError::InvalidStart(format!("{} values for {} variables", x0.len(), instance.dimension())));
    }
    for (v, x) in instance.variables.iter().zip(&x0) {
        if !v.admits(*x) {
            return Err(SolveError::InvalidStart(format!("{x} is outside the domain of {}", v.name)));
        }
    }
    for x in &mut x0 {
        *x += 0.0;
    }
    let delta_max = opts.delta_max.unwrap_or(1024.0 * opts.delta0);
    let start_counters = harness.counters();
    let mut run = Run {
        instance,
        harness,
        opts,
        history: Vec::new(),
        seen: HashMap::new(),
        trace: PolicyTrace::for_constraints(&instance.constraints),
        base_requests: start_counters.requests,
        base_executions: start_counters.executions,
        base_hits: start_counters.cache_hits,
    };
    let mut restoration_evaluations = 0;

    if opts.restoration && restoration_merit(instance, &x0) != (0, 0.0) {
        let (x, n) = restore(instance, &x0, opts);
        x0 = x;
        restoration_evaluations = n;
    }

    let mut state = SolverState { feasible: None, infeasible: None, delta: opts.delta0, h_max: f64::INFINITY, iteration: 0 };
    let stop = match run.eval(&x0, &[])? {
        Err(stop) => stop,
        Ok(i) => {
            let e = &run.history[i].eval;
            if e.is_barrier() {
                return Err(SolveError::InfeasibleStart(why_rejected(e)));
            }
            let kind = if e.is_feasible() {
                state.feasible = Some(Incumbent::of(e));
                IncumbentKind::Feasible
            } else {
                state.infeasible = Some(Incumbent::of(e));
                IncumbentKind::Infeasible
            };
            run.history[i].incumbent = Some(kind);
            iterate(&mut run, &mut state, delta_max)?
        }
    };

    let best = run
        .history
        .iter()
        .enumerate()
        .filter(|(_, r)| is_acceptable_solution(&r.eval, instance))
        .min_by(|(_, a), (_, b)| {
            a.eval
                .f
                .total_cmp(&b.eval.f)
                .then(a.eval.n_viol_nonquant.cmp(&b.eval.n_viol_nonquant))
                .then_with(|| lex(&a.eval.x, &b.eval.x))
        })
        .map(|(i, r)| Solution { x: r.eval.x.clone(), f: r.eval.f, h: r.eval.h, ordinal: i + 1 });

    let c = harness.counters();
    let counters = SolveCounters {
        evaluations: run.history.len(),
        rejected_a_priori: run.history.iter().filter(|r| r.eval.stage == Stage::RejectedAPriori).count(),
        hidden_events: run.history.iter().filter(|r| r.eval.hidden_event).count(),
        sim_requests: c.requests - run.base_requests,
        sim_executions: c.executions - run.base_executions,
        cache_hits: c.cache_hits - run.base_hits,
        iterations: state.iteration,
        restoration_evaluations,
    };
    Ok(SolveReport {
        problem: instance.name.clone(),
        variable_names: instance.variables.iter().map(|v| v.name.clone()).collect(),
        best,
        history: run.history,
        counters,
        stop,
        final_delta: state.delta,
        final_h_max: state.h_max,
        trace: run.trace,
    })
}

fn iterate(run: &mut Run<'_>, state: &mut SolverState, delta_max: f64) -> Result<StopReason, EvaluationFault> {
    let mut rng = ChaCha8Rng::seed_from_u64(run.opts.seed);
    loop {
        if state.delta < run.opts.delta_min {
            return Ok(StopReason::MeshConverged);
        }
        let mut candidates = next_candidates(state, run.instance);
        if run.opts.shuffle_poll {
            candidates.shuffle(&mut rng);
        }
        let mut indices = Vec::new();
        let mut stop = None;
        for c in &candidates {
            match run.eval(&c.x, &c.projected_by)? {
                Ok(i) => indices.push(i),
                Err(s) => {
                    stop = Some(s);
                    break;
                }
            }
        }
        let evals: Vec<PointEvaluation> = indices.iter().map(|&i| run.history[i].eval.clone()).collect();
        let (next, step) = update_state(state, &evals, delta_max);
        if let Some(k) = step.new_feasible {
            run.history[indices[k]].incumbent = Some(IncumbentKind::Feasible);
        }
        if let Some(k) = step.new_infeasible {
            run.history[indices[k]].incumbent.get_or_insert(IncumbentKind::Infeasible);
        }
        *state = next;
        if let Some(s) = stop {
            return Ok(s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackbox;
    use crate::problem::parse_problem;

    fn harness() -> Harness {
        let mut h = Harness::new();
        blackbox::register_all(&mut h);
        h
    }

    fn eval_with(x: Vec<f64>, f: f64, h: f64) -> PointEvaluation {
        PointEvaluation {
            x,
            stage: Stage::Simulated,
            results: Vec::new(),
            f,
            h,
            n_viol_nonquant: 0,
            hidden_event: false,
            unrelaxable_violated: false,
            sim_calls_used: 1,
            sims: Vec::new(),
        }
    }

    fn base_state() -> SolverState {
        SolverState {
            feasible: Some(Incumbent { x: vec![0.0], f: 5.0, h: 0.0, n_viol: 0 }),
            infeasible: Some(Incumbent { x: vec![1.0], f: 3.0, h: 1.0, n_viol: 0 }),
            delta: 1.0,
            h_max: 1.0,
            iteration: 0,
        }
    }

    #[test]
    fn feasible_improvement_doubles_mesh() {
        let (next, step) = update_state(&base_state(), &[eval_with(vec![2.0], 4.0, 0.0)], 100.0);
        assert_eq!(step.outcome, StepOutcome::Success);
        assert_eq!(next.feasible.unwrap().f, 4.0);
        assert_eq!(next.delta, 2.0);
    }

    #[test]
    fn all_worse_halves_mesh() {
        let evals = [eval_with(vec![2.0], 6.0, 0.0), eval_with(vec![3.0], 2.0, 2.0), eval_with(vec![4.0], f64::INFINITY, 0.0)];
        let (next, step) = update_state(&base_state(), &evals, 100.0);
        assert_eq!(step.outcome, StepOutcome::Failure);
        assert_eq!(next.delta, 0.5);
        assert_eq!(next.h_max, 1.0);
    }

    #[test]
    fn progressive_barrier_tightens() {
        let (next, step) = update_state(&base_state(), &[eval_with(vec![2.0], 2.5, 0.5)], 100.0);
        assert_eq!(step.outcome, StepOutcome::Success);
        let inc = next.infeasible.unwrap();
        assert_eq!((inc.f, inc.h), (2.5, 0.5));
        assert_eq!(next.h_max, 0.5);
    }

    #[test]
    fn partial_success_keeps_mesh() {
        let (next, step) = update_state(&base_state(), &[eval_with(vec![2.0], 3.5, 0.25)], 100.0);
        assert_eq!(step.outcome, StepOutcome::Partial);
        assert_eq!(next.delta, 1.0);
        assert_eq!(next.infeasible.unwrap().h, 0.25);
        assert_eq!(next.h_max, 0.25);
    }

    #[test]
    fn ties_go_to_smaller_point() {
        let evals = [eval_with(vec![3.0], 1.0, 0.0), eval_with(vec![2.0], 1.0, 0.0)];
        let (next, _) = update_state(&base_state(), &evals, 100.0);
        assert_eq!(next.feasible.unwrap().x, vec![2.0]);
    }

    const OMEGA: &str = "problem \"omega\"\nvar x1 real\nvar x2 real\nminimize expr \"x1 + x2\"\n\
                         constraint b1 class QUAK expr \"x1 >= 0\"\nconstraint b2 class QUAK expr \"x2 >= 0\"\n";

    #[test]
    fn omega_reaches_vertex() {
        let inst = parse_problem(OMEGA).unwrap();
        let opts = SolveOptions { x0: Some(vec![1.0, 1.0]), ..SolveOptions::default() };
        let r = solve(&inst, &harness(), &opts).unwrap();
        let best = r.best.unwrap();
        assert!(best.x.iter().all(|v| v.abs() <= 1e-6), "{:?}", best.x);
        assert!(best.f.abs() <= 1e-6);
        assert_eq!(r.stop, StopReason::MeshConverged);
    }

    #[test]
    fn infeasible_start_and_restoration() {
        let inst = parse_problem(OMEGA).unwrap();
        let opts = SolveOptions { x0: Some(vec![-1.0, 2.0]), ..SolveOptions::default() };
        assert!(matches!(solve(&inst, &harness(), &opts), Err(SolveError::InfeasibleStart(_))));
        let opts = SolveOptions { restoration: true, ..opts };
        let r = solve(&inst, &harness(), &opts).unwrap();
        assert!(r.counters.restoration_evaluations > 0);
        assert!(r.best.unwrap().f.abs() <= 1e-6);
    }

    #[test]
    fn zero_budget_has_no_solution() {
        let inst = parse_problem(OMEGA).unwrap();
        let opts = SolveOptions { budget_evals: 0, ..SolveOptions::default() };
        let r = solve(&inst, &harness(), &opts).unwrap();
        assert!(r.best.is_none());
        assert_eq!(r.stop, StopReason::EvaluationBudget);
    }

    #[test]
    fn shuffled_poll_is_seeded() {
        let inst = parse_problem(OMEGA).unwrap();
        let opts = SolveOptions { x0: Some(vec![3.0, 2.0]), shuffle_poll: true, seed: 7, ..SolveOptions::default() };
        let a = solve(&inst, &harness(), &opts).unwrap();
        let b = solve(&inst, &harness(), &opts).unwrap();
        assert_eq!(a.history, b.history);
        assert!(a.best.unwrap().f.abs() <= 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn incumbents_respect_unrelaxable_and_improve(x1 in 0f64..5.0, x2 in 0f64..5.0, d in 0.1f64..3.0) {
                let inst = parse_problem(OMEGA).unwrap();
                let opts = SolveOptions { x0: Some(vec![x1, x2]), delta0: d, budget_evals: 400, ..SolveOptions::default() };
                let r = solve(&inst, &harness(), &opts).unwrap();
                let mut last = f64::INFINITY;
                for row in r.history.iter().filter(|r| r.incumbent == Some(IncumbentKind::Feasible)) {
                    prop_assert!(!row.eval.unrelaxable_violated && !row.eval.hidden_event);
                    prop_assert!(row.eval.f <= last);
                    last = row.eval.f;
                }
                prop_assert!(r.final_delta <= 1024.0 * d);
            }
        }
    }
}
