//! Line-oriented problem files.
//!
//! ```text
//! # comment
//! problem "two bounds"
//! var x1 real in [-inf, inf]
//! var c cat {gcc, icc}
//! minimize expr "x1 + x2"
//! constraint b1 class QUAK expr "x1 >= 0"
//! constraint g1 class QRSK tol 1e-6 sim bb out 1 "<= 0" mirrors "x1 - 10"
//! constraint hot class NUSK sim bb out 8 flag feasible-when 0
//! constraint slow class QUSK detail feas sim bb elapsed "<= 10"
//! constraint diverged class NUSK sim bb code 3
//! simulation bb cmd "./blackbox --fast" timeout 10 outputs 12
//! simulation f fn "log" timeout 1 outputs 1
//! ```

use std::collections::BTreeMap;

use super::validate::{validate, DiagCode, Diagnostic};
use super::{
    format_value, parse_expr, Constraint, ConstraintBody, Expr, ExprTest, Objective, ProblemInstance, Sense, SetSpec,
    SimBinding, SimTest, VarKind, Variable,
};
use crate::sim::{Invocation, SimulationSpec};
use crate::taxonomy::{parse_class_code, ParsedCode, QuantifiableDetail};

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Word(String),
    Str(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> Diagnostic {
    Diagnostic::error(DiagCode::Syntax, message).at(line, col)
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(syntax(line, col, "unterminated string")),
                    Some('"') => break,
                    Some('\\') if matches!(chars.get(i + 1), Some('"' | '\\')) => {
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            toks.push(Tok { kind: TokKind::Str(s), col });
        } else if "[]{},".contains(c) {
            toks.push(Tok { kind: TokKind::Punct(c), col });
            i += 1;
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && !"[]{},\"#".contains(chars[i]) {
                i += 1;
            }
            toks.push(Tok { kind: TokKind::Word(chars[start..i].iter().collect()), col });
        }
    }
    Ok(toks)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn parse_number(text: &str) -> Option<f64> {
    let v = match text {
        "inf" | "+inf" => f64::INFINITY,
        "-inf" => f64::NEG_INFINITY,
        _ => text.parse::<f64>().ok().filter(|v| v.is_finite())?,
    };
    Some(v)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, message: impl Into<String>) -> Diagnostic {
        syntax(self.line, self.col(), message)
    }

    fn peek_word(&self) -> Option<&'a str> {
        match self.toks.get(self.pos).map(|t| &t.kind) {
            Some(TokKind::Word(w)) => Some(w),
            _ => None,
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn word(&mut self, what: &str) -> Result<&'a str, Diagnostic> {
        match self.toks.get(self.pos).map(|t| &t.kind) {
            Some(TokKind::Word(w)) => {
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), Diagnostic> {
        match self.peek_word() {
            Some(w) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{kw}`"))),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.keyword(kw).is_ok()
    }

    fn ident(&mut self, what: &str) -> Result<&'a str, Diagnostic> {
        let col = self.col();
        let w = self.word(what)?;
        if is_identifier(w) {
            Ok(w)
        } else {
            Err(syntax(self.line, col, format!("{w:?} is not a valid {what}")))
        }
    }

    /// Returns the string and the column of its first character.
    fn string(&mut self, what: &str) -> Result<(&'a str, usize), Diagnostic> {
        match self.toks.get(self.pos) {
            Some(Tok { kind: TokKind::Str(s), col }) => {
                self.pos += 1;
                Ok((s, col + 1))
            }
            _ => Err(self.err(format!("expected quoted {what}"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, Diagnostic> {
        let col = self.col();
        let w = self.word(what)?;
        parse_number(w).ok_or_else(|| syntax(self.line, col, format!("expected {what}, found {w:?}")))
    }

    fn integer<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, Diagnostic> {
        let col = self.col();
        let w = self.word(what)?;
        w.parse::<T>()
            .map_err(|_| syntax(self.line, col, format!("expected {what}, found {w:?}")))
    }

    fn punct(&mut self, p: char) -> Result<(), Diagnostic> {
        match self.toks.get(self.pos).map(|t| &t.kind) {
            Some(TokKind::Punct(c)) if *c == p => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{p}`"))),
        }
    }

    fn finish(&self) -> Result<(), Diagnostic> {
        if self.done() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    /// `[lo, hi]`
    fn interval(&mut self) -> Result<(f64, f64), Diagnostic> {
        self.punct('[')?;
        let lo = self.number("lower bound")?;
        self.punct(',')?;
        let hi = self.number("upper bound")?;
        self.punct(']')?;
        Ok((lo, hi))
    }

    /// `{a, b, ...}` as raw words.
    fn braced_list(&mut self) -> Result<Vec<&'a str>, Diagnostic> {
        self.punct('{')?;
        let mut items = Vec::new();
        if self.punct('}').is_ok() {
            return Ok(items);
        }
        loop {
            items.push(self.word("set element")?);
            if self.punct('}').is_ok() {
                return Ok(items);
            }
            self.punct(',')?;
        }
    }
}

fn set_from_items(items: &[&str]) -> SetSpec {
    let numbers: Option<Vec<f64>> = items.iter().map(|w| parse_number(w).filter(|v| v.is_finite())).collect();
    match numbers {
        Some(v) => SetSpec::Numbers(v),
        None => SetSpec::Labels(items.iter().map(|s| s.to_string()).collect()),
    }
}

/// Parses `in {..}` or `in [..]` from a relation string's right side.
fn parse_set_text(text: &str, line: usize, col: usize) -> Result<SetSpec, Diagnostic> {
    let toks = tokenize(text, line).map_err(|d| syntax(line, col, d.message))?;
    let toks: Vec<Tok> = toks.into_iter().map(|t| Tok { col: t.col + col - 1, ..t }).collect();
    let mut cur = Cursor { toks: &toks, pos: 0, line, end_col: col + text.len() };
    let set = if matches!(toks.first().map(|t| &t.kind), Some(TokKind::Punct('['))) {
        let (lo, hi) = cur.interval()?;
        SetSpec::Interval(lo, hi)
    } else {
        set_from_items(&cur.braced_list()?)
    };
    cur.finish()?;
    Ok(set)
}

/// Finds the relational operator of an a priori relation: `<=`, `>=`, `==`, or a
/// standalone `in`.
fn split_relation(text: &str) -> Option<(usize, &'static str)> {
    for op in ["<=", ">=", "=="] {
        if let Some(i) = text.find(op) {
            return Some((i, op));
        }
    }
    let bytes = text.as_bytes();
    let ident = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let mut from = 0;
    while let Some(rel) = text[from..].find("in") {
        let i = from + rel;
        let before_ok = i == 0 || !ident(bytes[i - 1]);
        let after_ok = bytes.get(i + 2).is_none_or(|b| !ident(*b));
        let rest = text[i + 2..].trim_start();
        if before_ok && after_ok && (rest.starts_with('{') || rest.starts_with('[')) {
            return Some((i, "in"));
        }
        from = i + 2;
    }
    None
}

fn expr_at(text: &str, line: usize, col: usize) -> Result<Expr, Diagnostic> {
    parse_expr(text).map_err(|e| {
        let code = match e {
            super::ExprError::UnknownFunction { .. } => DiagCode::UnknownFunction,
            _ => DiagCode::Syntax,
        };
        Diagnostic::error(code, e.to_string()).at(line, col + e.col() - 1)
    })
}

/// `lhs <= rhs`, `lhs >= rhs`, `lhs == rhs`, `lhs in {..}`, `lhs in [lo, hi]`.
fn parse_relation(text: &str, line: usize, col: usize) -> Result<(Expr, ExprTest), Diagnostic> {
    let (at, op) = split_relation(text)
        .ok_or_else(|| syntax(line, col, "expected a relation: <=, >=, == or in"))?;
    let lhs = expr_at(&text[..at], line, col)?;
    let rhs_col = col + at + op.len();
    let rhs_text = &text[at + op.len()..];
    if op == "in" {
        let trimmed = rhs_text.trim_start();
        let set = parse_set_text(trimmed, line, rhs_col + (rhs_text.len() - trimmed.len()))?;
        return Ok((lhs, ExprTest::Member(set)));
    }
    let rhs = expr_at(rhs_text, line, rhs_col)?;
    let test = if op == "==" { ExprTest::Equality } else { ExprTest::Inequality };
    let body = match (op, rhs.is_zero_constant()) {
        (">=", true) => Expr::negate(lhs),
        (_, true) => lhs,
        (">=", false) => Expr::binary(super::expr::BinOp::Sub, rhs, lhs),
        (_, false) => Expr::binary(super::expr::BinOp::Sub, lhs, rhs),
    };
    Ok((body, test))
}

/// Simulation-side relation: `<= b`, `>= b`, `== b`, `in {..}`, `in [..]`.
fn parse_sim_relation(text: &str, line: usize, col: usize) -> Result<SimTest, Diagnostic> {
    let trimmed = text.trim_start();
    let col = col + (text.len() - trimmed.len());
    let sense = if trimmed.starts_with("<=") {
        Some(Sense::Le)
    } else if trimmed.starts_with(">=") {
        Some(Sense::Ge)
    } else if trimmed.starts_with("==") {
        Some(Sense::Eq)
    } else {
        None
    };
    if let Some(sense) = sense {
        let rest = trimmed[2..].trim();
        let rhs = parse_number(rest)
            .filter(|v| v.is_finite())
            .ok_or_else(|| syntax(line, col + 2, format!("expected a finite number, found {rest:?}")))?;
        return Ok(SimTest::Compare { sense, rhs });
    }
    if let Some(rest) = trimmed.strip_prefix("in") {
        let set_text = rest.trim_start();
        return Ok(SimTest::Member(parse_set_text(set_text, line, col + 2 + (rest.len() - set_text.len()))?));
    }
    Err(syntax(line, col, "expected <=, >=, == or in"))
}

fn parse_sense_rhs(text: &str, line: usize, col: usize) -> Result<(Sense, f64), Diagnostic> {
    match parse_sim_relation(text, line, col)? {
        SimTest::Compare { sense, rhs } => Ok((sense, rhs)),
        _ => Err(syntax(line, col, "elapsed time takes <=, >= or =="))
    }
}

#[derive(Default)]
struct Builder {
    name: Option<String>,
    variables: Vec<Variable>,
    objective: Option<Objective>,
    constraints: Vec<Constraint>,
    simulations: Vec<SimulationSpec>,
    /// Declaration line of each named item, for positioning later diagnostics.
    lines: BTreeMap<String, usize>,
}

impl Builder {
    fn line(&mut self, cur: &mut Cursor<'_>) -> Result<(), Diagnostic> {
        let line = cur.line;
        let head = cur.word("a declaration")?;
        match head {
            "problem" => {
                let (name, _) = cur.string("problem name")?;
                if self.name.is_some() {
                    return Err(Diagnostic::error(DiagCode::DuplicateName, "problem name declared twice").at(line, 1));
                }
                self.name = Some(name.to_string());
            }
            "var" => {
                let name = cur.ident("variable name")?.to_string();
                let kind_col = cur.col();
                let var = match cur.word("variable kind")? {
                    k @ ("real" | "int") => {
                        let kind = if k == "real" { VarKind::Real } else { VarKind::Integer };
                        let (lower, upper) = if cur.eat_keyword("in") {
                            let (lo, hi) = cur.interval()?;
                            ((lo != f64::NEG_INFINITY).then_some(lo), (hi != f64::INFINITY).then_some(hi))
                        } else {
                            (None, None)
                        };
                        Variable { name: name.clone(), kind, lower, upper }
                    }
                    "bin" => Variable { name: name.clone(), kind: VarKind::Binary, lower: None, upper: None },
                    "cat" => {
                        let labels = cur.braced_list()?;
                        for l in &labels {
                            if !is_identifier(l) {
                                return Err(cur.err(format!("{l:?} is not a valid label")));
                            }
                        }
                        let labels = labels.iter().map(|s| s.to_string()).collect();
                        Variable { name: name.clone(), kind: VarKind::Categorical(labels), lower: None, upper: None }
                    }
                    other => return Err(syntax(line, kind_col, format!("unknown variable kind {other:?}; expected real, int, bin or cat"))),
                };
                self.lines.entry(name).or_insert(line);
                self.variables.push(var);
            }
            "minimize" => {
                let objective = match cur.word("`expr` or `sim`")? {
                    "expr" => {
                        let (text, col) = cur.string("expression")?;
                        Objective::Expr(expr_at(text, line, col)?)
                    }
                    "sim" => {
                        let simulation = cur.ident("simulation name")?.to_string();
                        cur.keyword("out")?;
                        let index = cur.integer("output index")?;
                        Objective::Sim { simulation, index }
                    }
                    other => return Err(cur.err(format!("unknown objective form {other:?}"))),
                };
                if self.objective.is_some() {
                    return Err(Diagnostic::error(DiagCode::DuplicateName, "objective declared twice").at(line, 1));
                }
                self.lines.entry("objective".into()).or_insert(line);
                self.objective = Some(objective);
            }
            "constraint" => {
                let c = constraint(cur)?;
                self.lines.entry(c.name.clone()).or_insert(line);
                self.constraints.push(c);
            }
            "simulation" => {
                let id = cur.ident("simulation name")?.to_string();
                let invocation = match cur.word("`cmd` or `fn`")? {
                    "cmd" => {
                        let (text, col) = cur.string("command line")?;
                        let argv = shlex::split(text)
                            .filter(|a| !a.is_empty())
                            .ok_or_else(|| syntax(line, col, "command line is empty or badly quoted"))?;
                        Invocation::Command(argv)
                    }
                    "fn" => Invocation::InProcess(cur.string("function name")?.0.to_string()),
                    other => return Err(cur.err(format!("unknown invocation {other:?}"))),
                };
                let mut timeout_secs = None;
                let mut outputs = None;
                while !cur.done() {
                    match cur.word("`timeout` or `outputs`")? {
                        "timeout" => timeout_secs = Some(cur.number("timeout in seconds")?),
                        "outputs" => outputs = Some(cur.integer("output count")?),
                        other => return Err(cur.err(format!("unknown simulation option {other:?}"))),
                    }
                }
                let timeout_secs = timeout_secs.ok_or_else(|| cur.err("missing `timeout <seconds>`"))?;
                let outputs = outputs.ok_or_else(|| cur.err("missing `outputs <count>`"))?;
                self.lines.entry(id.clone()).or_insert(line);
                self.simulations.push(SimulationSpec {
                    id,
                    invocation,
                    timeout_secs,
                    outputs,
                    error_codes: BTreeMap::new(),
                });
            }
            other => return Err(syntax(line, 1, format!("unknown declaration {other:?}"))),
        }
        cur.finish()
    }
}

fn constraint(cur: &mut Cursor<'_>) -> Result<Constraint, Diagnostic> {
    let line = cur.line;
    let name = cur.ident("constraint name")?.to_string();
    cur.keyword("class")?;
    let code_col = cur.col();
    let code = cur.word("class code")?;
    let class = match parse_class_code(code) {
        Ok(ParsedCode::Class(c)) => c,
        Ok(ParsedCode::Pattern(p)) => {
            return Err(syntax(line, code_col, format!("{p} is a pattern; a constraint needs an exact class")))
        }
        Err(e) => return Err(syntax(line, code_col, e.to_string())),
    };
    let mut detail = None;
    let mut tolerance = None;
    loop {
        if cur.eat_keyword("detail") {
            let col = cur.col();
            let w = cur.word("detail mode")?;
            detail = Some(
                QuantifiableDetail::from_keyword(w)
                    .ok_or_else(|| syntax(line, col, format!("unknown detail {w:?}; expected full, feas or viol")))?,
            );
        } else if cur.eat_keyword("tol") {
            let col = cur.col();
            let w = cur.word("tolerance")?;
            tolerance = Some(w.parse::<f64>().map_err(|_| syntax(line, col, format!("bad tolerance {w:?}")))?);
        } else {
            break;
        }
    }
    let body = match cur.word("`expr` or `sim`")? {
        "expr" => {
            let (text, col) = cur.string("relation")?;
            let (expr, test) = parse_relation(text, line, col)?;
            ConstraintBody::APriori { expr, test }
        }
        "sim" => {
            let simulation = cur.ident("simulation name")?.to_string();
            let binding = match cur.word("`out`, `elapsed` or `code`")? {
                "out" => {
                    let index = cur.integer("output index")?;
                    let test = if cur.eat_keyword("flag") {
                        cur.keyword("feasible-when")?;
                        SimTest::Flag { feasible_when: cur.number("flag value")? }
                    } else {
                        let (text, col) = cur.string("relation")?;
                        parse_sim_relation(text, line, col)?
                    };
                    let mirrors = if cur.eat_keyword("mirrors") {
                        let (text, col) = cur.string("expression")?;
                        Some(expr_at(text, line, col)?)
                    } else {
                        None
                    };
                    SimBinding::Output { simulation, index, test, mirrors }
                }
                "elapsed" => {
                    let (text, col) = cur.string("relation")?;
                    let (sense, rhs) = parse_sense_rhs(text, line, col)?;
                    SimBinding::Elapsed { simulation, sense, rhs }
                }
                "code" => SimBinding::ExitCode { simulation, code: cur.integer("exit code")? },
                other => return Err(cur.err(format!("unknown simulation binding {other:?}"))),
            };
            ConstraintBody::Simulation(binding)
        }
        other => return Err(cur.err(format!("unknown constraint body {other:?}"))),
    };
    Ok(Constraint { name, class, detail, tolerance, body })
}

/// Parses and validates a problem file.
///
/// Returns the instance when no errors were found, together with every
/// diagnostic (warnings included). Syntax errors do not stop the scan, so all
/// malformed lines are reported at once.
pub fn parse_problem_with_diagnostics(text: &str) -> (Option<ProblemInstance>, Vec<Diagnostic>) {
    let mut b = Builder::default();
    let mut diags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = match tokenize(raw, line) {
            Ok(t) => t,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor { toks: &toks, pos: 0, line, end_col: raw.chars().count() + 1 };
        if let Err(d) = b.line(&mut cur) {
            diags.push(d);
        }
    }
    let Some(objective) = b.objective.take() else {
        diags.push(Diagnostic::error(DiagCode::MissingObjective, "no `minimize` declaration"));
        return (None, diags);
    };
    let mut instance = ProblemInstance {
        name: b.name.take().unwrap_or_default(),
        variables: std::mem::take(&mut b.variables),
        objective,
        constraints: std::mem::take(&mut b.constraints),
        simulations: std::mem::take(&mut b.simulations),
    };
    instance.sync_exit_code_tables();
    for mut d in validate(&instance) {
        if d.line.is_none() {
            d.line = d.subject.as_ref().and_then(|s| b.lines.get(s)).copied();
        }
        diags.push(d);
    }
    let ok = !diags.iter().any(Diagnostic::is_error);
    (ok.then_some(instance), diags)
}

/// Parses a problem file, failing with all diagnostics if any is an error.
pub fn parse_problem(text: &str) -> Result<ProblemInstance, Vec<Diagnostic>> {
    match parse_problem_with_diagnostics(text) {
        (Some(instance), _) => Ok(instance),
        (None, diags) => Err(diags),
    }
}

fn bound_text(v: Option<f64>, default: &str) -> String {
    v.map_or_else(|| default.to_string(), format_value)
}

/// Canonical text of an instance; `parse_problem(&render(i))` yields `i` again.
pub fn render(instance: &ProblemInstance) -> String {
    let mut out = format!("problem {}\n", quote(&instance.name));
    for v in &instance.variables {
        let decl = match &v.kind {
            VarKind::Real | VarKind::Integer => {
                let kind = if v.kind == VarKind::Real { "real" } else { "int" };
                if v.lower.is_none() && v.upper.is_none() {
                    kind.to_string()
                } else {
                    format!("{kind} in [{}, {}]", bound_text(v.lower, "-inf"), bound_text(v.upper, "inf"))
                }
            }
            VarKind::Binary => "bin".into(),
            VarKind::Categorical(labels) => format!("cat {{{}}}", labels.join(", ")),
        };
        out.push_str(&format!("var {} {decl}\n", v.name));
    }
    match &instance.objective {
        Objective::Expr(e) => out.push_str(&format!("minimize expr {}\n", quote(&e.to_string()))),
        Objective::Sim { simulation, index } => out.push_str(&format!("minimize sim {simulation} out {index}\n")),
    }
    for c in &instance.constraints {
        out.push_str(&format!("constraint {} class {}", c.name, c.class));
        if let Some(d) = c.detail {
            out.push_str(&format!(" detail {}", d.keyword()));
        }
        if let Some(t) = c.tolerance {
            out.push_str(&format!(" tol {}", format_value(t)));
        }
        let body = match &c.body {
            ConstraintBody::APriori { expr, test } => {
                let rel = match test {
                    ExprTest::Inequality => format!("{expr} <= 0"),
                    ExprTest::Equality => format!("{expr} == 0"),
                    ExprTest::Member(set) => format!("{expr} in {}", set_text(set)),
                };
                format!("expr {}", quote(&rel))
            }
            ConstraintBody::Simulation(b) => match b {
                SimBinding::Output { simulation, index, test, mirrors } => {
                    let test = match test {
                        SimTest::Compare { sense, rhs } => quote(&format!("{} {}", sense.symbol(), format_value(*rhs))),
                        SimTest::Member(set) => quote(&format!("in {}", set_text(set))),
                        SimTest::Flag { feasible_when } => format!("flag feasible-when {}", format_value(*feasible_when)),
                    };
                    let mirrors = mirrors
                        .as_ref()
                        .map(|m| format!(" mirrors {}", quote(&m.to_string())))
                        .unwrap_or_default();
                    format!("sim {simulation} out {index} {test}{mirrors}")
                }
                SimBinding::Elapsed { simulation, sense, rhs } => {
                    format!("sim {simulation} elapsed {}", quote(&format!("{} {}", sense.symbol(), format_value(*rhs))))
                }
                SimBinding::ExitCode { simulation, code } => format!("sim {simulation} code {code}"),
            },
        };
        out.push_str(&format!(" {body}\n"));
    }
    for s in &instance.simulations {
        let inv = match &s.invocation {
            Invocation::Command(argv) => {
                let joined = shlex::try_join(argv.iter().map(String::as_str)).unwrap_or_else(|_| argv.join(" "));
                format!("cmd {}", quote(&joined))
            }
            Invocation::InProcess(name) => format!("fn {}", quote(name)),
        };
        out.push_str(&format!(
            "simulation {} {inv} timeout {} outputs {}\n",
            s.id,
            format_value(s.timeout_secs),
            s.outputs
        ));
    }
    out
}

fn set_text(set: &SetSpec) -> String {
    match set {
        SetSpec::Numbers(v) => format!("{{{}}}", v.iter().map(|x| format_value(*x)).collect::<Vec<_>>().join(", ")),
        SetSpec::Labels(v) => format!("{{{}}}", v.join(", ")),
        SetSpec::Interval(lo, hi) => format!("[{}, {}]", bound_text(Some(*lo), ""), bound_text(Some(*hi), "")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::ConstraintClass;

    const OMEGA: &str = r#"
# two bounds, linear objective
problem "omega"
var x1 real
var x2 real
minimize expr "x1 + x2"
constraint b1 class QUAK expr "x1 >= 0"
constraint b2 class QUAK expr "x2 >= 0"
"#;

    #[test]
    fn omega_instance() {
        let inst = parse_problem(OMEGA).unwrap();
        assert_eq!(inst.dimension(), 2);
        assert_eq!(inst.constraints.len(), 2);
        assert_eq!(inst.constraints[0].class, ConstraintClass::QUAK);
        assert_eq!(inst.constraints[0].a_priori_expr().unwrap().to_string(), "-x1");
        assert_eq!(inst.constraints[0].kind().short(), "ineq");
    }

    #[test]
    fn general_right_hand_sides_are_moved_left() {
        let inst = parse_problem(
            "problem \"p\"\nvar x1 real\nvar x2 real\nminimize expr \"x1\"\n\
             constraint budget class QRAK tol 0 expr \"x1 + x2 <= 100\"\n\
             constraint lower class QUAK expr \"x1 >= -1\"\n",
        )
        .unwrap();
        assert_eq!(inst.constraints[0].a_priori_expr().unwrap().to_string(), "x1 + x2 - 100");
        assert_eq!(inst.constraints[1].a_priori_expr().unwrap().to_string(), "-1 - x1");
    }

    #[test]
    fn declared_hidden_is_rejected() {
        let text = "problem \"p\"\nvar x real\nminimize sim s out 0\n\
                    constraint h class NUSH sim s out 1 flag feasible-when 0\n\
                    simulation s fn \"sum\" timeout 1 outputs 2\n";
        let diags = parse_problem(text).unwrap_err();
        let d = diags.iter().find(|d| d.code == DiagCode::DeclaredHidden).unwrap();
        assert_eq!(d.line, Some(4));
    }

    #[test]
    fn availability_mismatch() {
        let text = "problem \"p\"\nvar x real\nminimize expr \"x\"\n\
                    constraint g class QRAK tol 0 sim s out 0 \"<= 0\"\n\
                    simulation s fn \"sum\" timeout 1 outputs 1\n";
        let diags = parse_problem(text).unwrap_err();
        assert!(diags.iter().any(|d| d.code == DiagCode::AvailabilityMismatch));
    }

    #[test]
    fn expression_errors_carry_line_columns() {
        let text = "problem \"p\"\nvar x1 real\nminimize expr \"x1 +\"\n";
        let diags = parse_problem(text).unwrap_err();
        let d = &diags[0];
        assert_eq!(d.code, DiagCode::Syntax);
        // `minimize expr "` is 15 characters; the expression column is 5.
        assert_eq!((d.line, d.col), (Some(3), Some(15 + 5)));
    }

    #[test]
    fn all_bad_lines_are_reported() {
        let text = "problem \"p\"\nvar x1 real\nvar x2 blob\nminimize expr \"x1\"\nconstraint c class QXAK expr \"x1 <= 0\"\n";
        let diags = parse_problem(text).unwrap_err();
        let lines: Vec<_> = diags.iter().filter(|d| d.code == DiagCode::Syntax).map(|d| d.line.unwrap()).collect();
        assert_eq!(lines, vec![3, 5]);
    }

    #[test]
    fn duplicate_constraint_names() {
        let text = "problem \"p\"\nvar x real\nminimize expr \"x\"\n\
                    constraint c1 class QUAK expr \"x >= 0\"\nconstraint c1 class QUAK expr \"x <= 3\"\n";
        let diags = parse_problem(text).unwrap_err();
        assert!(diags.iter().any(|d| d.code == DiagCode::DuplicateName));
    }

    #[test]
    fn render_roundtrip_on_every_form() {
        let text = r#"problem "all \"forms\""
var x1 real in [0, 10]
var x2 int in [-inf, 5]
var b bin
var cc cat {gcc, icc}
minimize sim bb out 0
constraint budget class QRAK tol 1e-6 expr "x1 + x2 <= 100"
constraint relax class QRAK tol 0 expr "b in {0, 1}"
constraint box class QUAK expr "x1 in [0.5, 2]"
constraint comp class NUAK expr "cc in {gcc}"
constraint eq class NRAK expr "x1 == 1"
constraint g1 class QRSK detail viol tol 0.01 sim bb out 1 "<= 2.5" mirrors "x1 - 10"
constraint tox class NRSK sim bb out 2 flag feasible-when 0
constraint conc class QUSK sim bb out 3 "in [0, 1]"
constraint slow class QUSK detail feas sim bb elapsed "<= 10"
constraint diverged class NUSK sim bb code 3
simulation bb cmd "'/path with space/bb' --fast" timeout 10 outputs 4
simulation f fn "log" timeout 0.5 outputs 1
"#;
        let inst = parse_problem(text).unwrap();
        let rendered = render(&inst);
        assert_eq!(parse_problem(&rendered).unwrap(), inst);
        assert_eq!(render(&parse_problem(&rendered).unwrap()), rendered);
        assert_eq!(inst.simulation("bb").unwrap().error_codes.get(&3).map(String::as_str), Some("diverged"));
    }
}
