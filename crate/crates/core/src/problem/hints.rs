//! Advisory reformulations that move a constraint toward an easier leaf.

use std::fmt;

use super::{Constraint, MeasureShape, ProblemInstance, SimBinding, SimTest};
use crate::taxonomy::{Availability, ConstraintClass, Quantifiability};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hint {
    pub constraint: String,
    pub from: ConstraintClass,
    /// Suggested class or pattern, e.g. `QRSK` or `Q*AK`.
    pub target: String,
    pub from_leaf: u8,
    pub to_leaf: u8,
    pub reason: String,
}

impl Hint {
    /// `"<target> candidate, leaf <from>→<to>"`
    pub fn summary(&self) -> String {
        format!("{} candidate, leaf {}→{}", self.target, self.from_leaf, self.to_leaf)
    }
}

impl fmt::Display for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}; {}", self.constraint, self.from, self.summary(), self.reason)
    }
}

fn has_numeric_measure(c: &Constraint) -> bool {
    match c.shape() {
        MeasureShape::Compare { .. } => true,
        MeasureShape::Member(set) => !matches!(set, super::SetSpec::Labels(_)),
        MeasureShape::Flag { .. } | MeasureShape::ExitCode(_) => false,
    }
}

/// Lists reformulations that lower the leaf index of a constraint.
///
/// Only the Q/N and A/S axes are ever moved. Relaxing an unrelaxable
/// constraint changes the problem, so it is never suggested.
pub fn reformulation_hints(instance: &ProblemInstance) -> Vec<Hint> {
    let mut hints = Vec::new();
    for c in &instance.constraints {
        if c.class.is_hidden() {
            continue;
        }
        if !c.class.is_quantifiable() && has_numeric_measure(c) {
            if let Ok(to) = c.class.with_quantifiability(Quantifiability::Quantifiable) {
                hints.push(Hint {
                    constraint: c.name.clone(),
                    from: c.class,
                    target: to.code(),
                    from_leaf: c.class.leaf_index(),
                    to_leaf: to.leaf_index(),
                    reason: format!("`{}` yields a numeric value, so its violation can be measured", c.binding_text()),
                });
            }
        }
        if let Some(SimBinding::Output { mirrors: Some(m), test, .. }) = c.sim_binding() {
            let Ok(to) = c.class.with_availability(Availability::APriori) else { continue };
            let is_bound = c.class.is_quantifiable()
                && m.single_var_affine().is_some()
                && matches!(test, SimTest::Compare { .. } | SimTest::Member(super::SetSpec::Interval(..)));
            let (target, reason) = if is_bound {
                (
                    "Q*AK".to_string(),
                    format!("the output equals `{m}`, a bound on one input that can be stated algebraically and projected"),
                )
            } else {
                (to.code(), format!("the output equals `{m}`, which depends on the inputs only"))
            };
            hints.push(Hint {
                constraint: c.name.clone(),
                from: c.class,
                target,
                from_leaf: c.class.leaf_index(),
                to_leaf: to.leaf_index(),
                reason,
            });
        }
    }
    hints
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_problem;

    fn hints_of(body: &str) -> Vec<Hint> {
        let text = format!(
            "problem \"h\"\nvar x1 real in [0, 10]\nvar x2 real in [0, 10]\nminimize sim s out 0\n{body}\
             simulation s fn \"styrene\" timeout 5 outputs 12\n"
        );
        reformulation_hints(&parse_problem(&text).unwrap())
    }

    #[test]
    fn bound_behind_black_box() {
        let h = hints_of("constraint g2 class QRSK tol 0 sim s out 2 \"<= 0\" mirrors \"x1 - 7\"\n");
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].summary(), "Q*AK candidate, leaf 5→1");
    }

    #[test]
    fn nonquantifiable_with_numeric_output() {
        let h = hints_of("constraint g1 class NRSK sim s out 1 \"<= 0\"\n");
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].summary(), "QRSK candidate, leaf 6→5");
    }

    #[test]
    fn flags_and_all_qrak_yield_nothing() {
        assert!(hints_of("constraint f class NUSK sim s out 8 flag feasible-when 0\n").is_empty());
        assert!(hints_of("constraint b class QRAK tol 0 expr \"x1 + x2 <= 10\"\n").is_empty());
    }

    #[test]
    fn unrelaxable_stays_unrelaxable() {
        let h = hints_of("constraint g class NUSK sim s out 6 \"<= 0\" mirrors \"x1 * x2 - 30\"\n");
        let targets: Vec<_> = h.iter().map(|h| h.target.as_str()).collect();
        assert_eq!(targets, vec!["QUSK", "NUAK"]);
        assert!(h.iter().all(|h| !h.target.contains('R')));
    }
}
