//! Feasibility and violation measures of single constraints.

use std::fmt;

use thiserror::Error;

use super::{Constraint, MeasureShape, Sense, SetSpec};
use crate::taxonomy::QuantifiableDetail;

/// Absolute tolerance deciding whether an equality (or membership in a finite
/// numeric set) holds.
pub const EQUALITY_DECISION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Quantified(f64),
    Unquantified,
}

impl Measure {
    pub fn value(self) -> Option<f64> {
        match self {
            Measure::Quantified(v) => Some(v),
            Measure::Unquantified => None,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Quantified(v) => write!(f, "{v}"),
            Measure::Unquantified => f.write_str("unquantified"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationInfo {
    pub feasible: bool,
    /// Zero for feasible points.
    pub violation: Measure,
    /// Distance from a feasible point to the constraint boundary; zero when infeasible.
    pub feasibility_margin: Measure,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("constraint {0} is not quantifiable")]
pub struct NotQuantifiable(pub String);

/// Raw `(feasible, violation, margin)` for a numeric value under `shape`.
///
/// Returns `None` for shapes that carry no numeric measure (flags, exit codes,
/// label sets).
pub(crate) fn raw_measure(shape: &MeasureShape<'_>, value: f64) -> Option<(bool, f64, f64)> {
    match shape {
        MeasureShape::Compare { sense, rhs } => Some(match sense {
            Sense::Le => {
                let c = value - rhs;
                (c <= 0.0, c.max(0.0), (-c).max(0.0))
            }
            Sense::Ge => {
                let c = rhs - value;
                (c <= 0.0, c.max(0.0), (-c).max(0.0))
            }
            Sense::Eq => {
                let dist = (value - rhs).abs();
                if dist <= EQUALITY_DECISION_TOL {
                    (true, 0.0, 0.0)
                } else {
                    (false, dist, 0.0)
                }
            }
        }),
        MeasureShape::Member(SetSpec::Numbers(items)) => {
            let dist = items.iter().map(|a| (value - a).abs()).fold(f64::INFINITY, f64::min);
            Some(if dist <= EQUALITY_DECISION_TOL { (true, 0.0, 0.0) } else { (false, dist, 0.0) })
        }
        MeasureShape::Member(SetSpec::Interval(lo, hi)) => Some(if value < *lo {
            (false, lo - value, 0.0)
        } else if value > *hi {
            (false, value - hi, 0.0)
        } else {
            (true, 0.0, (value - lo).min(hi - value))
        }),
        MeasureShape::Member(SetSpec::Labels(_)) | MeasureShape::Flag { .. } | MeasureShape::ExitCode(_) => None,
    }
}

/// Boolean satisfaction of a nonquantifiable constraint from a numeric value.
///
/// Flags compare exactly against their feasible value.
pub(crate) fn satisfied(shape: &MeasureShape<'_>, value: f64) -> Option<bool> {
    match shape {
        MeasureShape::Flag { feasible_when } => Some(value == *feasible_when),
        MeasureShape::ExitCode(_) => None,
        _ => raw_measure(shape, value).map(|(feasible, _, _)| feasible),
    }
}

/// Measures a quantifiable constraint at the raw value of its body.
///
/// The raw value is the normalized expression value for a priori constraints
/// and the output (or elapsed time) for simulation constraints. The detail
/// mode of the constraint blanks out the side that cannot be measured.
pub fn violation_measure(constraint: &Constraint, raw: f64) -> Result<ViolationInfo, NotQuantifiable> {
    let detail = constraint
        .effective_detail()
        .ok_or_else(|| NotQuantifiable(constraint.name.clone()))?;
    let (feasible, violation, margin) =
        raw_measure(&constraint.shape(), raw).ok_or_else(|| NotQuantifiable(constraint.name.clone()))?;
    Ok(apply_detail(detail, feasible, violation, margin))
}

pub(crate) fn apply_detail(detail: QuantifiableDetail, feasible: bool, violation: f64, margin: f64) -> ViolationInfo {
    let (violation, feasibility_margin) = match (detail, feasible) {
        (QuantifiableDetail::Fully, _) => (Measure::Quantified(violation), Measure::Quantified(margin)),
        (QuantifiableDetail::FeasibilityOnly, true) => (Measure::Quantified(0.0), Measure::Quantified(margin)),
        (QuantifiableDetail::FeasibilityOnly, false) => (Measure::Unquantified, Measure::Quantified(0.0)),
        (QuantifiableDetail::ViolationOnly, true) => (Measure::Quantified(0.0), Measure::Unquantified),
        (QuantifiableDetail::ViolationOnly, false) => (Measure::Quantified(violation), Measure::Quantified(0.0)),
    };
    ViolationInfo { feasible, violation, feasibility_margin }
}
