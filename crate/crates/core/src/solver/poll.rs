use crate::evaluator::a_priori_result;
use crate::problem::{ProblemInstance, VarKind};

use super::policy::single_var_bound;
use super::SolverState;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub x: Vec<f64>,
    /// Constraints whose bound moved this point.
    pub projected_by: Vec<String>,
}

/// Bounds on one variable collected from `Q*AK` constraints.
#[derive(Debug, Clone, PartialEq)]
struct VarBound {
    constraint: String,
    var: usize,
    lo: f64,
    hi: f64,
}

fn bounds(instance: &ProblemInstance) -> Vec<VarBound> {
    instance
        .constraints
        .iter()
        .filter_map(|c| {
            let (var, lo, hi) = single_var_bound(c)?;
            Some(VarBound { constraint: c.name.clone(), var: instance.variable_index(&var)?, lo, hi })
        })
        .collect()
}

fn normalize(v: f64) -> f64 {
    // Turns -0.0 into 0.0 so equal points serialize identically.
    v + 0.0
}

/// Clamps coordinate `i` of `x` into `[lo, hi]`, then nudges it until `ok`
/// accepts the point, so rounding never leaves it just outside.
fn clamp_into(x: &mut [f64], i: usize, lo: f64, hi: f64, ok: impl Fn(&[f64]) -> bool) -> bool {
    let v = x[i];
    let target = if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        return false;
    };
    x[i] = normalize(target);
    for _ in 0..8 {
        if ok(x) {
            break;
        }
        x[i] = if target == lo { x[i].next_up() } else { x[i].next_down() };
    }
    true
}

/// Projects coordinate `i` of `x` onto its declared domain and `Q*AK` bounds.
fn project(instance: &ProblemInstance, bounds: &[VarBound], x: &mut [f64], i: usize) -> Vec<String> {
    let var = &instance.variables[i];
    let (lo, hi) = var.domain();
    let integral = matches!(var.kind, VarKind::Integer);
    x[i] = normalize(x[i].clamp(lo, hi));
    let mut moved = Vec::new();
    for b in bounds.iter().filter(|b| b.var == i) {
        let (mut lo, mut hi) = (b.lo, b.hi);
        if integral {
            lo = lo.ceil();
            hi = hi.floor();
        }
        let c = instance.constraint(&b.constraint).expect("bound constraint exists");
        if clamp_into(x, i, lo, hi, |p| a_priori_result(instance, c, p).satisfied() == Some(true)) {
            moved.push(b.constraint.clone());
        }
    }
    moved
}

fn steps(instance: &ProblemInstance, center: &[f64], i: usize, delta: f64) -> Vec<f64> {
    match &instance.variables[i].kind {
        VarKind::Real => vec![center[i] + delta, center[i] - delta],
        VarKind::Integer => {
            let step = delta.round().max(1.0);
            vec![center[i] + step, center[i] - step]
        }
        VarKind::Binary => vec![1.0 - center[i]],
        VarKind::Categorical(labels) => (0..labels.len())
            .map(|k| k as f64)
            .filter(|&k| k != center[i])
            .collect(),
    }
}

/// Poll points around the incumbents: feasible first, then infeasible; axis
/// order, `+` before `-`. Points are projected under the projection policy;
/// duplicates and the centers themselves are dropped.
pub fn next_candidates(state: &SolverState, instance: &ProblemInstance) -> Vec<Candidate> {
    let bounds = bounds(instance);
    let mut centers: Vec<&[f64]> = Vec::new();
    for inc in [&state.feasible, &state.infeasible].into_iter().flatten() {
        if !centers.iter().any(|c| same(c, &inc.x)) {
            centers.push(&inc.x);
        }
    }
    let mut out: Vec<Candidate> = Vec::new();
    for center in &centers {
        for i in 0..instance.dimension() {
            for v in steps(instance, center, i, state.delta) {
                let mut x = center.to_vec();
                x[i] = normalize(v);
                let projected_by = project(instance, &bounds, &mut x, i);
                if centers.iter().any(|c| same(c, &x)) || out.iter().any(|c| same(&c.x, &x)) {
                    continue;
                }
                out.push(Candidate { x, projected_by });
            }
        }
    }
    out
}

pub(crate) fn same(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p.to_bits() == q.to_bits())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_problem;
    use crate::solver::Incumbent;

    fn state(x: Vec<f64>, delta: f64) -> SolverState {
        SolverState {
            feasible: Some(Incumbent { x, f: 0.0, h: 0.0, n_viol: 0 }),
            infeasible: None,
            delta,
            h_max: f64::INFINITY,
            iteration: 0,
        }
    }

    fn points(c: &[Candidate]) -> Vec<Vec<f64>> {
        c.iter().map(|c| c.x.clone()).collect()
    }

    #[test]
    fn axis_poll() {
        let inst = parse_problem("problem \"p\"\nvar x1 real\nvar x2 real\nminimize expr \"x1 + x2\"\n").unwrap();
        let c = next_candidates(&state(vec![0.5, 0.5], 0.25), &inst);
        assert_eq!(points(&c), vec![vec![0.75, 0.5], vec![0.25, 0.5], vec![0.5, 0.75], vec![0.5, 0.25]]);
    }

    #[test]
    fn lower_bound_projection() {
        let inst = parse_problem(
            "problem \"p\"\nvar x1 real\nvar x2 real\nminimize expr \"x1 + x2\"\n\
             constraint b1 class QUAK expr \"x1 >= 0\"\n",
        )
        .unwrap();
        let c = next_candidates(&state(vec![0.0, 0.5], 1.0), &inst);
        assert!(c.iter().all(|c| c.x[0] >= 0.0));
        assert_eq!(points(&c), vec![vec![1.0, 0.5], vec![0.0, 1.5], vec![0.0, -0.5]]);
        let c = next_candidates(&state(vec![0.25, 0.5], 1.0), &inst);
        assert_eq!(c[1].x, vec![0.0, 0.5]);
        assert_eq!(c[1].projected_by, vec!["b1".to_string()]);
    }

    #[test]
    fn projected_point_satisfies_awkward_bound() {
        let inst = parse_problem(
            "problem \"p\"\nvar x real\nminimize expr \"x\"\nconstraint b class QUAK expr \"3 * x >= 0.1\"\n",
        )
        .unwrap();
        let c = next_candidates(&state(vec![1.0], 1.0), &inst);
        let low = c.iter().find(|c| c.x[0] < 1.0).unwrap();
        assert!(3.0 * low.x[0] >= 0.1, "{}", low.x[0]);
    }

    #[test]
    fn discrete_variables() {
        let inst = parse_problem(
            "problem \"p\"\nvar n int in [0, 10]\nvar b bin\nvar cc cat {gcc, icc, clang}\nminimize expr \"n + b\"\n",
        )
        .unwrap();
        let c = next_candidates(&state(vec![0.0, 0.0, 0.0], 0.3), &inst);
        assert_eq!(points(&c), vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 2.0]]);
        let c = next_candidates(&state(vec![5.0, 1.0, 1.0], 2.6), &inst);
        assert_eq!(c[0].x[0], 8.0);
        assert_eq!(c[1].x[0], 2.0);
    }

    #[test]
    fn categorical_alternatives() {
        let inst = parse_problem("problem \"p\"\nvar cc cat {gcc, icc}\nminimize expr \"0\"\n").unwrap();
        let c = next_candidates(&state(vec![0.0], 1.0), &inst);
        assert_eq!(inst.format_point(&c[0].x), "icc");
    }
}
