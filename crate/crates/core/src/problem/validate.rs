//! Static checks on a problem instance.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use super::{
    Constraint, ConstraintBody, ConstraintKind, Expr, ExprTest, Objective, ProblemInstance, SetSpec,
    SimBinding, SimTest, VarKind,
};
use crate::sim::Invocation;
use crate::taxonomy::Availability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagCode {
    Syntax,
    UnknownFunction,
    UnknownVariable,
    UnknownSimulation,
    UnresolvedBinding,
    DuplicateName,
    DeclaredHidden,
    AvailabilityMismatch,
    MissingTolerance,
    InvalidTolerance,
    MeaninglessTolerance,
    ToleranceOnUnrelaxable,
    DetailOnNonquantifiable,
    QuantifiableBinaryTest,
    EqualityNonquantifiable,
    RelaxableExitCode,
    DuplicateExitCode,
    CategoricalMisuse,
    InvalidBounds,
    InvalidSimulation,
    MissingObjective,
    MissingProblemName,
    NoVariables,
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    pub message: String,
    /// Declaration the diagnostic is about (variable, constraint or simulation name).
    pub subject: Option<String>,
    pub line: Option<usize>,
    pub col: Option<usize>,
}

impl Diagnostic {
    pub fn error(code: DiagCode, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, code, message: message.into(), subject: None, line: None, col: None }
    }

    pub fn warning(code: DiagCode, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, ..Self::error(code, message) }
    }

    pub fn about(mut self, subject: impl Into<String>) -> Self {
        self.subject = Some(subject.into());
        self
    }

    pub fn at(mut self, line: usize, col: usize) -> Self {
        self.line = Some(line);
        self.col = Some(col);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.col) {
            (Some(l), Some(c)) => write!(f, "line {l}, col {c}: ")?,
            (Some(l), None) => write!(f, "line {l}: ")?,
            _ => {}
        }
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

/// Checks every instance invariant. An empty result means the instance is clean;
/// warnings do not prevent solving.
pub fn validate(instance: &ProblemInstance) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if instance.name.trim().is_empty() {
        out.push(Diagnostic::error(DiagCode::MissingProblemName, "problem has no name"));
    }
    if instance.variables.is_empty() {
        out.push(Diagnostic::error(DiagCode::NoVariables, "problem declares no variables"));
    }
    check_variables(instance, &mut out);
    check_simulations(instance, &mut out);
    check_objective(instance, &mut out);

    let mut seen = HashSet::new();
    let mut codes = HashSet::new();
    for c in &instance.constraints {
        if !seen.insert(c.name.as_str()) {
            out.push(
                Diagnostic::error(DiagCode::DuplicateName, format!("constraint {} declared twice", c.name))
                    .about(&c.name),
            );
        }
        if let Some(SimBinding::ExitCode { simulation, code }) = c.sim_binding() {
            if !codes.insert((simulation.as_str(), *code)) {
                out.push(
                    Diagnostic::error(
                        DiagCode::DuplicateExitCode,
                        format!("exit code {code} of {simulation} is mapped to more than one constraint"),
                    )
                    .about(&c.name),
                );
            }
        }
        check_constraint(instance, c, &mut out);
    }
    out
}

fn check_variables(instance: &ProblemInstance, out: &mut Vec<Diagnostic>) {
    let mut names = HashSet::new();
    for v in &instance.variables {
        if !names.insert(v.name.as_str()) {
            out.push(
                Diagnostic::error(DiagCode::DuplicateName, format!("variable {} declared twice", v.name)).about(&v.name),
            );
        }
        if let (Some(lo), Some(hi)) = (v.lower, v.upper) {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                out.push(
                    Diagnostic::error(DiagCode::InvalidBounds, format!("variable {} has bounds [{lo}, {hi}]", v.name))
                        .about(&v.name),
                );
            }
        }
        if let VarKind::Categorical(labels) = &v.kind {
            if labels.is_empty() {
                out.push(
                    Diagnostic::error(DiagCode::InvalidBounds, format!("categorical variable {} has no labels", v.name))
                        .about(&v.name),
                );
            }
            let distinct: HashSet<&String> = labels.iter().collect();
            if distinct.len() != labels.len() {
                out.push(
                    Diagnostic::error(DiagCode::DuplicateName, format!("categorical variable {} repeats a label", v.name))
                        .about(&v.name),
                );
            }
        }
    }
}

fn check_simulations(instance: &ProblemInstance, out: &mut Vec<Diagnostic>) {
    let mut ids = HashSet::new();
    for s in &instance.simulations {
        if !ids.insert(s.id.as_str()) {
            out.push(Diagnostic::error(DiagCode::DuplicateName, format!("simulation {} declared twice", s.id)).about(&s.id));
        }
        if !(s.timeout_secs > 0.0 && s.timeout_secs.is_finite()) {
            out.push(
                Diagnostic::error(DiagCode::InvalidSimulation, format!("simulation {} needs a positive timeout", s.id))
                    .about(&s.id),
            );
        }
        let empty = match &s.invocation {
            Invocation::Command(argv) => argv.is_empty(),
            Invocation::InProcess(name) => name.is_empty(),
        };
        if empty {
            out.push(
                Diagnostic::error(DiagCode::InvalidSimulation, format!("simulation {} has an empty invocation", s.id))
                    .about(&s.id),
            );
        }
        for target in s.error_codes.values() {
            if instance.constraint(target).is_none() {
                out.push(
                    Diagnostic::error(
                        DiagCode::UnresolvedBinding,
                        format!("exit-code table of {} names unknown constraint {target}", s.id),
                    )
                    .about(&s.id),
                );
            }
        }
    }
}

fn check_objective(instance: &ProblemInstance, out: &mut Vec<Diagnostic>) {
    match &instance.objective {
        Objective::Expr(e) => check_numeric_expr(instance, e, "objective", out),
        Objective::Sim { simulation, index } => check_output(instance, simulation, *index, "objective", out),
    }
}

fn check_output(instance: &ProblemInstance, sim: &str, index: usize, subject: &str, out: &mut Vec<Diagnostic>) {
    match instance.simulation(sim) {
        None => out.push(
            Diagnostic::error(DiagCode::UnknownSimulation, format!("{subject} refers to unknown simulation {sim}"))
                .about(subject),
        ),
        Some(spec) if index >= spec.outputs => out.push(
            Diagnostic::error(
                DiagCode::UnresolvedBinding,
                format!("{subject} reads output {index} but {sim} declares {} outputs", spec.outputs),
            )
            .about(subject),
        ),
        _ => {}
    }
}

/// Resolves variable references and rejects categorical variables in arithmetic.
fn check_numeric_expr(instance: &ProblemInstance, e: &Expr, subject: &str, out: &mut Vec<Diagnostic>) {
    for name in resolve_names(instance, e, subject, out) {
        if let Some(i) = instance.variable_index(&name) {
            if matches!(instance.variables[i].kind, VarKind::Categorical(_)) {
                out.push(
                    Diagnostic::error(
                        DiagCode::CategoricalMisuse,
                        format!("{subject} uses categorical variable {name} in arithmetic"),
                    )
                    .about(subject),
                );
            }
        }
    }
}

fn resolve_names(instance: &ProblemInstance, e: &Expr, subject: &str, out: &mut Vec<Diagnostic>) -> BTreeSet<String> {
    match e.variables() {
        Ok(names) => {
            for n in &names {
                if instance.variable_index(n).is_none() {
                    out.push(
                        Diagnostic::error(DiagCode::UnknownVariable, format!("{subject} refers to unknown variable {n}"))
                            .about(subject),
                    );
                }
            }
            names
        }
        Err(msg) => {
            out.push(Diagnostic::error(DiagCode::UnknownVariable, format!("{subject}: {msg}")).about(subject));
            BTreeSet::new()
        }
    }
}

fn check_constraint(instance: &ProblemInstance, c: &Constraint, out: &mut Vec<Diagnostic>) {
    let name = c.name.as_str();
    let err = |code, msg: String| Diagnostic::error(code, msg).about(name);
    let warn = |code, msg: String| Diagnostic::warning(code, msg).about(name);

    if c.class.is_hidden() {
        out.push(err(
            DiagCode::DeclaredHidden,
            format!("{name} is declared NUSH; hidden constraints are never declared, they show up as simulation failures"),
        ));
    }
    let is_a_priori_body = matches!(c.body, ConstraintBody::APriori { .. });
    if (c.class.availability() == Availability::APriori) != is_a_priori_body {
        out.push(err(
            DiagCode::AvailabilityMismatch,
            format!(
                "{name} has class {} but its body is {}",
                c.class,
                if is_a_priori_body { "an expression (a priori)" } else { "a simulation binding" }
            ),
        ));
    }
    if c.detail.is_some() && !c.class.is_quantifiable() {
        out.push(err(DiagCode::DetailOnNonquantifiable, format!("{name} is nonquantifiable and cannot carry a detail mode")));
    }

    match c.tolerance {
        Some(t) if !(t >= 0.0 && t.is_finite()) => {
            out.push(err(DiagCode::InvalidTolerance, format!("{name} has tolerance {t}; expected a finite value >= 0")))
        }
        Some(t) if !c.class.is_quantifiable() && t > 0.0 => out.push(warn(
            DiagCode::MeaninglessTolerance,
            format!("{name} is nonquantifiable; tolerance {t} has no measure to apply to"),
        )),
        Some(_) if !c.class.is_relaxable() => out.push(warn(
            DiagCode::ToleranceOnUnrelaxable,
            format!("{name} is unrelaxable; its tolerance is ignored"),
        )),
        None if c.class.is_quantifiable() && c.class.is_relaxable() => out.push(err(
            DiagCode::MissingTolerance,
            format!("{name} is quantifiable and relaxable and must declare its solution tolerance (tol 0 is allowed)"),
        )),
        _ => {}
    }

    if c.kind() == ConstraintKind::Equality && !c.class.is_quantifiable() && !c.class.is_a_priori() {
        out.push(warn(
            DiagCode::EqualityNonquantifiable,
            format!("{name} is a nonquantifiable simulation equality, which is hard to satisfy without any measure"),
        ));
    }

    match &c.body {
        ConstraintBody::APriori { expr, test } => match test {
            ExprTest::Member(SetSpec::Labels(labels)) => {
                if c.class.is_quantifiable() {
                    out.push(err(DiagCode::QuantifiableBinaryTest, format!("{name} tests label membership, which has no measure")));
                }
                match expr.as_variable().and_then(|v| instance.variable_index(&v)) {
                    Some(i) => match &instance.variables[i].kind {
                        VarKind::Categorical(declared) => {
                            for l in labels.iter().filter(|l| !declared.contains(l)) {
                                out.push(err(
                                    DiagCode::CategoricalMisuse,
                                    format!("{name}: {l:?} is not a label of {}", instance.variables[i].name),
                                ));
                            }
                        }
                        _ => out.push(err(
                            DiagCode::CategoricalMisuse,
                            format!("{name}: label sets apply to categorical variables only"),
                        )),
                    },
                    None => {
                        resolve_names(instance, expr, name, out);
                        out.push(err(
                            DiagCode::CategoricalMisuse,
                            format!("{name}: label membership needs a single categorical variable on the left"),
                        ));
                    }
                }
            }
            other => {
                check_numeric_expr(instance, expr, name, out);
                check_set(other_set(other), name, out);
            }
        },
        ConstraintBody::Simulation(binding) => {
            match binding {
                SimBinding::Output { simulation, index, test, mirrors } => {
                    check_output(instance, simulation, *index, name, out);
                    if let Some(m) = mirrors {
                        check_numeric_expr(instance, m, name, out);
                    }
                    match test {
                        SimTest::Flag { .. } if c.class.is_quantifiable() => out.push(err(
                            DiagCode::QuantifiableBinaryTest,
                            format!("{name} reads a binary flag but is declared quantifiable"),
                        )),
                        SimTest::Member(SetSpec::Labels(_)) => out.push(err(
                            DiagCode::CategoricalMisuse,
                            format!("{name}: simulation outputs are numeric; label sets do not apply"),
                        )),
                        SimTest::Member(set) => check_set(Some(set), name, out),
                        _ => {}
                    }
                }
                SimBinding::Elapsed { simulation, .. } => {
                    if instance.simulation(simulation).is_none() {
                        out.push(err(DiagCode::UnknownSimulation, format!("{name} refers to unknown simulation {simulation}")));
                    }
                }
                SimBinding::ExitCode { simulation, code } => {
                    if instance.simulation(simulation).is_none() {
                        out.push(err(DiagCode::UnknownSimulation, format!("{name} refers to unknown simulation {simulation}")));
                    }
                    if *code == 0 {
                        out.push(err(DiagCode::UnresolvedBinding, format!("{name}: exit code 0 means success and cannot be documented as a violation")));
                    }
                    if c.class.is_quantifiable() {
                        out.push(err(
                            DiagCode::QuantifiableBinaryTest,
                            format!("{name} is an exit code and carries no measure; declare it N"),
                        ));
                    }
                    if c.class.is_relaxable() {
                        out.push(err(
                            DiagCode::RelaxableExitCode,
                            format!("{name}: a documented exit code aborts the simulation, so it cannot be relaxable"),
                        ));
                    }
                }
            }
        }
    }
}

fn other_set(test: &ExprTest) -> Option<&SetSpec> {
    match test {
        ExprTest::Member(s) => Some(s),
        _ => None,
    }
}

fn check_set(set: Option<&SetSpec>, name: &str, out: &mut Vec<Diagnostic>) {
    match set {
        Some(SetSpec::Interval(lo, hi)) if lo.partial_cmp(hi).is_none_or(|o| o.is_gt()) => out.push(
            Diagnostic::error(DiagCode::InvalidBounds, format!("{name}: empty interval [{lo}, {hi}]")).about(name),
        ),
        Some(SetSpec::Numbers(v)) if v.is_empty() => {
            out.push(Diagnostic::error(DiagCode::InvalidBounds, format!("{name}: empty set")).about(name))
        }
        _ => {}
    }
}
