use std::collections::BTreeMap;
use std::fmt;

use crate::problem::{Constraint, ConstraintBody, ExprTest, SetSpec};
use crate::taxonomy::ConstraintClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Treatment {
    ExtremeBarrier,
    ProgressiveBarrier,
    Projection,
    PenaltyCount,
    StageAPriori,
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Treatment of a class. `is_bound` says whether the constraint is a bound on
/// a single input (only meaningful for `Q*AK`).
pub fn default_policy(class: ConstraintClass, is_bound: bool) -> Treatment {
    if class.is_quantifiable() && class.is_a_priori() && is_bound {
        Treatment::Projection
    } else if class.is_hidden() || !class.is_relaxable() {
        Treatment::ExtremeBarrier
    } else if class.is_quantifiable() {
        Treatment::ProgressiveBarrier
    } else {
        Treatment::PenaltyCount
    }
}

/// Bound `(variable, lower, upper)` stated by a `Q*AK` constraint on one input.
pub(crate) fn single_var_bound(c: &Constraint) -> Option<(String, f64, f64)> {
    if !(c.class.is_quantifiable() && c.class.is_a_priori()) {
        return None;
    }
    let ConstraintBody::APriori { expr, test } = &c.body else { return None };
    let aff = expr.single_var_affine()?;
    if aff.coef == 0.0 || !aff.coef.is_finite() {
        return None;
    }
    let at = |target: f64| (target - aff.constant) / aff.coef;
    let (lo, hi) = match test {
        ExprTest::Inequality if aff.coef > 0.0 => (f64::NEG_INFINITY, at(0.0)),
        ExprTest::Inequality => (at(0.0), f64::INFINITY),
        ExprTest::Equality => (at(0.0), at(0.0)),
        ExprTest::Member(SetSpec::Interval(a, b)) => {
            let (u, v) = (at(*a), at(*b));
            (u.min(v), u.max(v))
        }
        ExprTest::Member(_) => return None,
    };
    Some((aff.var, lo, hi))
}

pub fn treatment_of(c: &Constraint) -> Treatment {
    default_policy(c.class, single_var_bound(c).is_some())
}

/// Name used in traces for hidden events.
pub const HIDDEN_ROW: &str = "(hidden)";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceCounts {
    /// Points at which the constraint was evaluated.
    pub evaluated: usize,
    /// Points at which the treatment acted: a violation was handled or a poll point projected.
    pub fired: usize,
}

/// Per constraint × class × treatment counts over a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolicyTrace {
    /// Declaration order of the rows.
    pub order: Vec<(String, ConstraintClass, Treatment)>,
    pub counts: BTreeMap<(String, Treatment), TraceCounts>,
}

impl PolicyTrace {
    pub fn for_constraints(constraints: &[Constraint]) -> Self {
        let mut t = PolicyTrace::default();
        for c in constraints {
            t.row(&c.name, c.class, treatment_of(c));
        }
        t.row(HIDDEN_ROW, ConstraintClass::NUSH, Treatment::ExtremeBarrier);
        t
    }

    fn row(&mut self, name: &str, class: ConstraintClass, treatment: Treatment) -> &mut TraceCounts {
        let key = (name.to_string(), treatment);
        if !self.counts.contains_key(&key) {
            self.order.push((name.to_string(), class, treatment));
        }
        self.counts.entry(key).or_default()
    }

    pub(crate) fn record(&mut self, name: &str, class: ConstraintClass, treatment: Treatment, fired: bool) {
        let counts = self.row(name, class, treatment);
        counts.evaluated += 1;
        if fired {
            counts.fired += 1;
        }
    }

    pub(crate) fn record_fire_only(&mut self, name: &str, class: ConstraintClass, treatment: Treatment) {
        self.row(name, class, treatment).fired += 1;
    }

    pub fn get(&self, name: &str, treatment: Treatment) -> Option<TraceCounts> {
        self.counts.get(&(name.to_string(), treatment)).copied()
    }

    /// Treatments attached to `name`.
    pub fn treatments(&self, name: &str) -> Vec<Treatment> {
        self.order.iter().filter(|(n, _, _)| n == name).map(|(_, _, t)| *t).collect()
    }

    /// Text table: constraint, class, treatment, evaluated, fired.
    pub fn to_table(&self) -> String {
        let width = self.order.iter().map(|(n, _, _)| n.len()).max().unwrap_or(0).max("constraint".len());
        let mut out = format!(
            "{:<width$}  class  {:<18}  {:>9}  {:>6}\n",
            "constraint", "treatment", "evaluated", "fired"
        );
        for (name, class, t) in &self.order {
            let c = self.counts[&(name.clone(), *t)];
            out.push_str(&format!(
                "{name:<width$}  {class}   {:<18}  {:>9}  {:>6}\n",
                t.to_string(),
                c.evaluated,
                c.fired
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::enumerate_classes;

    #[test]
    fn mapping_is_total() {
        let expected = [
            (ConstraintClass::QRAK, Treatment::ProgressiveBarrier),
            (ConstraintClass::NRAK, Treatment::PenaltyCount),
            (ConstraintClass::QUAK, Treatment::ExtremeBarrier),
            (ConstraintClass::NUAK, Treatment::ExtremeBarrier),
            (ConstraintClass::QRSK, Treatment::ProgressiveBarrier),
            (ConstraintClass::NRSK, Treatment::PenaltyCount),
            (ConstraintClass::QUSK, Treatment::ExtremeBarrier),
            (ConstraintClass::NUSK, Treatment::ExtremeBarrier),
            (ConstraintClass::NUSH, Treatment::ExtremeBarrier),
        ];
        for (class, t) in expected {
            assert_eq!(default_policy(class, false), t, "{class}");
        }
        for class in enumerate_classes() {
            let bound = default_policy(class, true);
            if class.is_quantifiable() && class.is_a_priori() {
                assert_eq!(bound, Treatment::Projection);
            } else {
                assert_ne!(bound, Treatment::Projection, "{class}");
            }
        }
    }
}
