//! Problem instances: variables, an extended-value objective, and classified
//! constraints of the form `c(x) = 0`, `c(x) <= 0` or `c(x) in A`.

pub mod dsl;
pub mod expr;
pub mod hints;
pub mod validate;
pub mod violation;

use std::collections::HashMap;
use std::fmt;

use crate::sim::SimulationSpec;
use crate::taxonomy::{ConstraintClass, QuantifiableDetail};

pub use dsl::{parse_problem, parse_problem_with_diagnostics, render};
pub use expr::{parse_expr, DomainError, Expr, ExprError, VarEnv};
pub use hints::{reformulation_hints, Hint};
pub use validate::{validate, DiagCode, Diagnostic, Severity};
pub use violation::{violation_measure, Measure, NotQuantifiable, ViolationInfo, EQUALITY_DECISION_TOL};

#[derive(Debug, Clone, PartialEq)]
pub enum VarKind {
    Real,
    Integer,
    Binary,
    /// Encoded ordinally (0, 1, ...) for the solver, compared by label in constraints.
    Categorical(Vec<String>),
}

impl VarKind {
    pub fn is_discrete(&self) -> bool {
        !matches!(self, VarKind::Real)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Variable {
    pub fn real(name: impl Into<String>) -> Self {
        Variable { name: name.into(), kind: VarKind::Real, lower: None, upper: None }
    }

    pub fn bounded(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Variable { name: name.into(), kind: VarKind::Real, lower: Some(lower), upper: Some(upper) }
    }

    /// Closed domain box implied by the declaration.
    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            VarKind::Binary => (0.0, 1.0),
            VarKind::Categorical(labels) => (0.0, labels.len().saturating_sub(1) as f64),
            _ => (
                self.lower.unwrap_or(f64::NEG_INFINITY),
                self.upper.unwrap_or(f64::INFINITY),
            ),
        }
    }

    /// Whether `value` is an admissible encoded value for this variable.
    pub fn admits(&self, value: f64) -> bool {
        let (lo, hi) = self.domain();
        value.is_finite() && value >= lo && value <= hi && (!self.kind.is_discrete() || value.fract() == 0.0)
    }

    pub fn label(&self, value: f64) -> Option<&str> {
        match &self.kind {
            VarKind::Categorical(labels) if value >= 0.0 && value.fract() == 0.0 => {
                labels.get(value as usize).map(String::as_str)
            }
            _ => None,
        }
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        match &self.kind {
            VarKind::Categorical(labels) => labels.iter().position(|l| l == label),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "==",
        }
    }
}

/// Right-hand side of a set-membership constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec {
    Numbers(Vec<f64>),
    Labels(Vec<String>),
    Interval(f64, f64),
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSpec::Numbers(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
            SetSpec::Labels(v) => write!(f, "{{{}}}", v.join(", ")),
            SetSpec::Interval(lo, hi) => write!(f, "[{lo}, {hi}]"),
        }
    }
}

/// Test applied to the (normalized) body of an a priori constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprTest {
    /// `body <= 0`
    Inequality,
    /// `body == 0`
    Equality,
    Member(SetSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimTest {
    Compare { sense: Sense, rhs: f64 },
    Member(SetSpec),
    /// Binary output; feasible iff the output equals `feasible_when`.
    Flag { feasible_when: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimBinding {
    Output {
        simulation: String,
        index: usize,
        test: SimTest,
        /// The modeler's statement that this output equals an expression of
        /// the inputs. Only used for reformulation hints.
        mirrors: Option<Expr>,
    },
    /// Wall-clock time of the simulation run.
    Elapsed { simulation: String, sense: Sense, rhs: f64 },
    /// Violated when the simulation exits with this documented code.
    ExitCode { simulation: String, code: i32 },
}

impl SimBinding {
    pub fn simulation(&self) -> &str {
        match self {
            SimBinding::Output { simulation, .. }
            | SimBinding::Elapsed { simulation, .. }
            | SimBinding::ExitCode { simulation, .. } => simulation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintBody {
    APriori { expr: Expr, test: ExprTest },
    Simulation(SimBinding),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Equality,
    Inequality,
    SetMembership,
}

impl ConstraintKind {
    pub fn short(self) -> &'static str {
        match self {
            ConstraintKind::Equality => "eq",
            ConstraintKind::Inequality => "ineq",
            ConstraintKind::SetMembership => "set",
        }
    }
}

/// Comparison a constraint applies to its raw value, after normalization.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureShape<'a> {
    Compare { sense: Sense, rhs: f64 },
    Member(&'a SetSpec),
    Flag { feasible_when: f64 },
    ExitCode(i32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub class: ConstraintClass,
    /// Refinement of a quantifiable class; `None` means fully quantifiable.
    pub detail: Option<QuantifiableDetail>,
    /// Satisfaction tolerance at the reported solution (relaxable constraints).
    pub tolerance: Option<f64>,
    pub body: ConstraintBody,
}

impl Constraint {
    pub fn kind(&self) -> ConstraintKind {
        match &self.body {
            ConstraintBody::APriori { test, .. } => match test {
                ExprTest::Inequality => ConstraintKind::Inequality,
                ExprTest::Equality => ConstraintKind::Equality,
                ExprTest::Member(_) => ConstraintKind::SetMembership,
            },
            ConstraintBody::Simulation(binding) => match binding {
                SimBinding::Output { test: SimTest::Compare { sense, .. }, .. }
                | SimBinding::Elapsed { sense, .. } => match sense {
                    Sense::Eq => ConstraintKind::Equality,
                    _ => ConstraintKind::Inequality,
                },
                _ => ConstraintKind::SetMembership,
            },
        }
    }

    /// Effective detail: `Some` exactly for quantifiable classes.
    pub fn effective_detail(&self) -> Option<QuantifiableDetail> {
        self.class
            .is_quantifiable()
            .then(|| self.detail.unwrap_or_default())
    }

    pub fn shape(&self) -> MeasureShape<'_> {
        match &self.body {
            ConstraintBody::APriori { test, .. } => match test {
                ExprTest::Inequality => MeasureShape::Compare { sense: Sense::Le, rhs: 0.0 },
                ExprTest::Equality => MeasureShape::Compare { sense: Sense::Eq, rhs: 0.0 },
                ExprTest::Member(set) => MeasureShape::Member(set),
            },
            ConstraintBody::Simulation(b) => match b {
                SimBinding::Output { test, .. } => match test {
                    SimTest::Compare { sense, rhs } => MeasureShape::Compare { sense: *sense, rhs: *rhs },
                    SimTest::Member(set) => MeasureShape::Member(set),
                    SimTest::Flag { feasible_when } => MeasureShape::Flag { feasible_when: *feasible_when },
                },
                SimBinding::Elapsed { sense, rhs, .. } => MeasureShape::Compare { sense: *sense, rhs: *rhs },
                SimBinding::ExitCode { code, .. } => MeasureShape::ExitCode(*code),
            },
        }
    }

    pub fn a_priori_expr(&self) -> Option<&Expr> {
        match &self.body {
            ConstraintBody::APriori { expr, .. } => Some(expr),
            ConstraintBody::Simulation(_) => None,
        }
    }

    pub fn sim_binding(&self) -> Option<&SimBinding> {
        match &self.body {
            ConstraintBody::Simulation(b) => Some(b),
            ConstraintBody::APriori { .. } => None,
        }
    }

    /// Human-readable description of the body, as shown in reports.
    pub fn binding_text(&self) -> String {
        match &self.body {
            ConstraintBody::APriori { expr, test } => match test {
                ExprTest::Inequality => format!("expr {expr} <= 0"),
                ExprTest::Equality => format!("expr {expr} == 0"),
                ExprTest::Member(set) => format!("expr {expr} in {set}"),
            },
            ConstraintBody::Simulation(b) => match b {
                SimBinding::Output { simulation, index, test, .. } => match test {
                    SimTest::Compare { sense, rhs } => {
                        format!("sim {simulation} out {index} {} {rhs}", sense.symbol())
                    }
                    SimTest::Member(set) => format!("sim {simulation} out {index} in {set}"),
                    SimTest::Flag { feasible_when } => {
                        format!("sim {simulation} out {index} flag feasible-when {feasible_when}")
                    }
                },
                SimBinding::Elapsed { simulation, sense, rhs } => {
                    format!("sim {simulation} elapsed {} {rhs}", sense.symbol())
                }
                SimBinding::ExitCode { simulation, code } => format!("sim {simulation} code {code}"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Expr(Expr),
    Sim { simulation: String, index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub variables: Vec<Variable>,
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
    pub simulations: Vec<SimulationSpec>,
}

impl ProblemInstance {
    pub fn dimension(&self) -> usize {
        self.variables.len()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub fn simulation(&self, id: &str) -> Option<&SimulationSpec> {
        self.simulations.iter().find(|s| s.id == id)
    }

    /// Constraints bound to simulation `id`, in declaration order.
    pub fn constraints_of_simulation<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Constraint> + 'a {
        self.constraints
            .iter()
            .filter(move |c| c.sim_binding().is_some_and(|b| b.simulation() == id))
    }

    /// Rebuilds each simulation's exit-code table from the `code` bindings.
    pub fn sync_exit_code_tables(&mut self) {
        for sim in &mut self.simulations {
            sim.error_codes.clear();
        }
        for c in &self.constraints {
            if let Some(SimBinding::ExitCode { simulation, code }) = c.sim_binding() {
                if let Some(sim) = self.simulations.iter_mut().find(|s| &s.id == simulation) {
                    sim.error_codes.insert(*code, c.name.clone());
                }
            }
        }
    }

    /// Variable values keyed by name, for expression evaluation.
    pub fn env<'a>(&'a self, x: &'a [f64]) -> PointEnv<'a> {
        PointEnv { index: self.variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect(), x }
    }

    /// Wire text for one point: one value per line, categorical values as labels.
    pub fn serialize_point(&self, x: &[f64]) -> String {
        let mut out = String::new();
        for (v, value) in self.variables.iter().zip(x) {
            match v.label(*value) {
                Some(label) => out.push_str(label),
                None => out.push_str(&format_value(*value)),
            }
            out.push('\n');
        }
        out
    }

    /// Display form of a point: comma separated, labels for categorical variables.
    pub fn format_point(&self, x: &[f64]) -> String {
        self.serialize_point(x).trim_end().replace('\n', ",")
    }

    /// Parses the comma-separated point syntax accepted by `format_point`.
    pub fn parse_point(&self, text: &str) -> Result<Vec<f64>, String> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != self.dimension() {
            return Err(format!("expected {} values, got {}", self.dimension(), parts.len()));
        }
        self.variables
            .iter()
            .zip(parts)
            .map(|(v, p)| {
                if let VarKind::Categorical(_) = v.kind {
                    v.label_index(p)
                        .map(|i| i as f64)
                        .ok_or_else(|| format!("{p:?} is not a label of {}", v.name))
                } else {
                    p.parse::<f64>().map_err(|_| format!("bad number {p:?} for {}", v.name))
                }
            })
            .collect()
    }
}

/// Shortest decimal text that reads back to the same `f64`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        v.to_string()
    }
}

pub struct PointEnv<'a> {
    index: HashMap<&'a str, usize>,
    x: &'a [f64],
}

impl VarEnv for PointEnv<'_> {
    fn value(&self, name: &str) -> Option<f64> {
        self.index.get(name).and_then(|&i| self.x.get(i).copied())
    }
}
