//! Algebraic expressions over the decision variables.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | name | name '[' index ']' | func '(' expr, ... ')'
//!         | 'sum' '(' name '=' int '..' int ',' expr ')' | '(' expr ')'
//! index  := int | name | name ('+' | '-') int
//! func   := abs | min | max | exp | log
//! ```
//!
//! `x[i]` inside `sum(i = 1..n, ...)` refers to the variable named `x1`, `x2`, ...

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Min,
    Max,
    Exp,
    Log,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        match name {
            "abs" => Some(Func::Abs),
            "min" => Some(Func::Min),
            "max" => Some(Func::Max),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

/// Index inside `name[...]`: an optional loop variable plus a constant offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexExpr {
    pub var: Option<String>,
    pub offset: i64,
}

impl fmt::Display for IndexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.var, self.offset) {
            (None, k) => write!(f, "{k}"),
            (Some(v), 0) => write!(f, "{v}"),
            (Some(v), k) if k > 0 => write!(f, "{v}+{k}"),
            (Some(v), k) => write!(f, "{v}-{}", -k),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    /// `base[index]`, naming the variable `format!("{base}{index}")`.
    Indexed { base: String, index: IndexExpr },
    /// Value of an enclosing `sum` loop index.
    Index(String),
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { func: Func, args: Vec<Expr> },
    Sum { index: String, lo: i64, hi: i64, body: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at col {col}: {message}")]
    Syntax { col: usize, message: String },
    #[error("unknown function {name:?} at col {col}")]
    UnknownFunction { name: String, col: usize },
}

impl ExprError {
    pub fn col(&self) -> usize {
        match self {
            ExprError::Syntax { col, .. } | ExprError::UnknownFunction { col, .. } => *col,
        }
    }
}

/// Evaluation failed: the offending sub-expression and why.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{expr}`: {reason}")]
pub struct DomainError {
    pub expr: String,
    pub reason: String,
}

/// Supplies variable values to [`Expr::eval`].
pub trait VarEnv {
    fn value(&self, name: &str) -> Option<f64>;
}

impl VarEnv for HashMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl VarEnv for BTreeMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl<F: Fn(&str) -> Option<f64>> VarEnv for F {
    fn value(&self, name: &str) -> Option<f64> {
        self(name)
    }
}

/// `a * x + b` in a single variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleVarAffine {
    pub var: String,
    pub coef: f64,
    pub constant: f64,
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    /// Negation, folding constants so that printing and reparsing agree.
    pub fn negate(e: Expr) -> Expr {
        match e {
            Expr::Const(v) => Expr::Const(-v),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn is_zero_constant(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 0.0)
    }

    pub fn eval(&self, env: &dyn VarEnv) -> Result<f64, DomainError> {
        let mut scope = Vec::new();
        self.eval_scoped(env, &mut scope)
    }

    fn eval_scoped(&self, env: &dyn VarEnv, scope: &mut Vec<(String, i64)>) -> Result<f64, DomainError> {
        let fail = |reason: String| DomainError { expr: self.to_string(), reason };
        let v = match self {
            Expr::Const(v) => *v,
            Expr::Var(name) => env
                .value(name)
                .ok_or_else(|| fail(format!("no value for variable {name}")))?,
            Expr::Indexed { base, index } => {
                let name = indexed_name(base, index, scope).map_err(fail)?;
                env.value(&name)
                    .ok_or_else(|| fail(format!("no value for variable {name}")))?
            }
            Expr::Index(name) => lookup_index(name, scope).map_err(fail)? as f64,
            Expr::Neg(inner) => -inner.eval_scoped(env, scope)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval_scoped(env, scope)?;
                let b = rhs.eval_scoped(env, scope)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(fail("division by zero".into()));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let p = a.powf(b);
                        if p.is_nan() {
                            return Err(fail(format!("{a} ^ {b} is undefined")));
                        }
                        p
                    }
                }
            }
            Expr::Call { func, args } => {
                let vals = args
                    .iter()
                    .map(|a| a.eval_scoped(env, scope))
                    .collect::<Result<Vec<_>, _>>()?;
                match func {
                    Func::Abs => vals[0].abs(),
                    Func::Exp => vals[0].exp(),
                    Func::Log => {
                        if vals[0] <= 0.0 {
                            return Err(fail(format!("log of nonpositive value {}", vals[0])));
                        }
                        vals[0].ln()
                    }
                    Func::Min => vals.iter().copied().fold(f64::INFINITY, f64::min),
                    Func::Max => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                }
            }
            Expr::Sum { index, lo, hi, body } => {
                let mut total = 0.0;
                for i in *lo..=*hi {
                    scope.push((index.clone(), i));
                    let term = body.eval_scoped(env, scope);
                    scope.pop();
                    total += term?;
                }
                total
            }
        };
        if !v.is_finite() {
            return Err(fail(format!("non-finite result {v}")));
        }
        Ok(v)
    }

    /// Every variable name referenced, with sums expanded.
    pub fn variables(&self) -> Result<BTreeSet<String>, String> {
        let mut out = BTreeSet::new();
        let mut scope = Vec::new();
        self.collect_vars(&mut scope, &mut out)?;
        Ok(out)
    }

    fn collect_vars(&self, scope: &mut Vec<(String, i64)>, out: &mut BTreeSet<String>) -> Result<(), String> {
        match self {
            Expr::Const(_) => {}
            Expr::Index(name) => {
                lookup_index(name, scope)?;
            }
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Indexed { base, index } => {
                out.insert(indexed_name(base, index, scope)?);
            }
            Expr::Neg(inner) => inner.collect_vars(scope, out)?,
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_vars(scope, out)?;
                rhs.collect_vars(scope, out)?;
            }
            Expr::Call { args, .. } => {
                for a in args {
                    a.collect_vars(scope, out)?;
                }
            }
            Expr::Sum { index, lo, hi, body } => {
                for i in *lo..=*hi {
                    scope.push((index.clone(), i));
                    let r = body.collect_vars(scope, out);
                    scope.pop();
                    r?;
                }
            }
        }
        Ok(())
    }

    /// Bare variable reference, if the whole expression is one.
    pub fn as_variable(&self) -> Option<String> {
        match self {
            Expr::Var(name) => Some(name.clone()),
            Expr::Indexed { base, index: IndexExpr { var: None, offset } } if *offset >= 0 => {
                Some(format!("{base}{offset}"))
            }
            _ => None,
        }
    }

    /// Recognizes `a * x + b` with `a != 0`, the shape of a bound constraint.
    pub fn single_var_affine(&self) -> Option<SingleVarAffine> {
        let (coeffs, constant) = self.affine()?;
        let mut nonzero = coeffs.into_iter().filter(|(_, c)| *c != 0.0);
        let (var, coef) = nonzero.next()?;
        if nonzero.next().is_some() {
            return None;
        }
        Some(SingleVarAffine { var, coef, constant })
    }

    fn affine(&self) -> Option<(BTreeMap<String, f64>, f64)> {
        match self {
            Expr::Const(v) => Some((BTreeMap::new(), *v)),
            Expr::Var(_) | Expr::Indexed { .. } => {
                let name = self.as_variable()?;
                Some((BTreeMap::from([(name, 1.0)]), 0.0))
            }
            Expr::Neg(inner) => {
                let (c, k) = inner.affine()?;
                Some((c.into_iter().map(|(n, v)| (n, -v)).collect(), -k))
            }
            Expr::Binary { op, lhs, rhs } => {
                let (mut lc, lk) = lhs.affine()?;
                let (rc, rk) = rhs.affine()?;
                match op {
                    BinOp::Add | BinOp::Sub => {
                        let sign = if *op == BinOp::Add { 1.0 } else { -1.0 };
                        for (n, v) in rc {
                            *lc.entry(n).or_insert(0.0) += sign * v;
                        }
                        Some((lc, lk + sign * rk))
                    }
                    BinOp::Mul => {
                        if lc.is_empty() {
                            Some((rc.into_iter().map(|(n, v)| (n, v * lk)).collect(), lk * rk))
                        } else if rc.is_empty() {
                            Some((lc.into_iter().map(|(n, v)| (n, v * rk)).collect(), lk * rk))
                        } else {
                            None
                        }
                    }
                    BinOp::Div if rc.is_empty() && rk != 0.0 => {
                        Some((lc.into_iter().map(|(n, v)| (n, v / rk)).collect(), lk / rk))
                    }
                    _ => None,
                }
            }
            Expr::Index(_) | Expr::Call { .. } | Expr::Sum { .. } => None,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Const(v) if v.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let wrap = self.precedence() < min_prec;
        if wrap {
            f.write_str("(")?;
        }
        match self {
            Expr::Const(v) => {
                if v.is_sign_negative() {
                    write!(f, "-{}", -v)?;
                } else {
                    write!(f, "{v}")?;
                }
            }
            Expr::Var(name) | Expr::Index(name) => f.write_str(name)?,
            Expr::Indexed { base, index } => write!(f, "{base}[{index}]")?,
            Expr::Neg(inner) => {
                f.write_str("-")?;
                inner.write_prec(f, 3)?;
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                if *op == BinOp::Pow {
                    lhs.write_prec(f, 5)?;
                    f.write_str("^")?;
                    rhs.write_prec(f, 3)?;
                } else {
                    lhs.write_prec(f, p)?;
                    write!(f, " {} ", op.symbol())?;
                    rhs.write_prec(f, p + 1)?;
                }
            }
            Expr::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.write_prec(f, 0)?;
                }
                f.write_str(")")?;
            }
            Expr::Sum { index, lo, hi, body } => {
                write!(f, "sum({index} = {lo}..{hi}, ")?;
                body.write_prec(f, 0)?;
                f.write_str(")")?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

fn lookup_index(name: &str, scope: &[(String, i64)]) -> Result<i64, String> {
    scope
        .iter()
        .rev()
        .find(|(n, _)| n == name)
        .map(|(_, v)| *v)
        .ok_or_else(|| format!("index {name} used outside of its sum"))
}

fn indexed_name(base: &str, index: &IndexExpr, scope: &[(String, i64)]) -> Result<String, String> {
    let base_value = match &index.var {
        Some(v) => lookup_index(v, scope)?,
        None => 0,
    };
    let i = base_value + index.offset;
    if i < 0 {
        return Err(format!("negative index {i} for {base}"));
    }
    Ok(format!("{base}{i}"))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { src: text.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_whitespace() {
                lx.pos += 1;
            }
            let col = lx.pos + 1;
            if lx.pos >= lx.src.len() {
                out.push((Tok::Eof, col));
                return Ok(out);
            }
            let c = lx.src[lx.pos];
            let tok = if c.is_ascii_digit() || (c == b'.' && lx.peek_digit(1)) {
                lx.number()?
            } else if c.is_ascii_alphabetic() || c == b'_' {
                let start = lx.pos;
                while lx.pos < lx.src.len()
                    && (lx.src[lx.pos].is_ascii_alphanumeric() || lx.src[lx.pos] == b'_')
                {
                    lx.pos += 1;
                }
                Tok::Ident(text[start..lx.pos].to_string())
            } else {
                let two = &lx.src[lx.pos..(lx.pos + 2).min(lx.src.len())];
                if two == b".." {
                    lx.pos += 2;
                    Tok::Sym("..")
                } else {
                    lx.pos += 1;
                    Tok::Sym(match c {
                        b'+' => "+",
                        b'-' => "-",
                        b'*' => "*",
                        b'/' => "/",
                        b'^' => "^",
                        b'(' => "(",
                        b')' => ")",
                        b'[' => "[",
                        b']' => "]",
                        b',' => ",",
                        b'=' => "=",
                        _ => {
                            return Err(ExprError::Syntax {
                                col,
                                message: format!("unexpected character {:?}", c as char),
                            })
                        }
                    })
                }
            };
            out.push((tok, col));
        }
    }

    fn peek_digit(&self, ahead: usize) -> bool {
        self.src.get(self.pos + ahead).is_some_and(|c| c.is_ascii_digit())
    }

    fn number(&mut self) -> Result<Tok, ExprError> {
        let start = self.pos;
        let mut is_int = true;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        // a '.' followed by '.' is a range operator, not a decimal point
        if self.pos < self.src.len() && self.src[self.pos] == b'.' && self.src.get(self.pos + 1) != Some(&b'.') {
            is_int = false;
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.peek_digit(0) {
                is_int = false;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        if is_int {
            if let Ok(i) = text.parse::<i64>() {
                return Ok(Tok::Int(i));
            }
        }
        text.parse::<f64>().map(Tok::Num).map_err(|_| ExprError::Syntax {
            col: start + 1,
            message: format!("malformed number {text:?}"),
        })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    indices: Vec<String>,
}

/// Parses an expression. Columns in errors are 1-based.
pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { toks: Lexer::tokens(text)?, pos: 0, indices: Vec::new() };
    let e = p.expr()?;
    match p.peek() {
        Tok::Eof => Ok(e),
        t => Err(p.error(format!("unexpected {}", describe(t)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Int(v) => format!("number {v}"),
        Tok::Ident(s) => format!("name {s:?}"),
        Tok::Sym(s) => format!("{s:?}"),
        Tok::Eof => "end of expression".into(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> ExprError {
        ExprError::Syntax { col: self.col(), message }
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ExprError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.error(format!("expected {sym:?}, found {}", describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat("*") {
                BinOp::Mul
            } else if self.eat("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat("-") {
            return Ok(Expr::negate(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat("^") {
            let exp = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn int(&mut self) -> Result<i64, ExprError> {
        let negative = self.eat("-");
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(if negative { -i } else { i })
            }
            t => Err(self.error(format!("expected integer, found {}", describe(&t)))),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let col = self.col();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Int(i) => Ok(Expr::Const(i as f64)),
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if name == "sum" && matches!(self.peek(), Tok::Sym("(")) {
                    return self.sum();
                }
                if self.eat("(") {
                    let func = Func::lookup(&name).ok_or(ExprError::UnknownFunction { name, col })?;
                    let mut args = vec![self.expr()?];
                    while self.eat(",") {
                        args.push(self.expr()?);
                    }
                    self.expect(")")?;
                    let arity_ok = match func {
                        Func::Min | Func::Max => args.len() >= 2,
                        _ => args.len() == 1,
                    };
                    if !arity_ok {
                        return Err(ExprError::Syntax {
                            col,
                            message: format!("wrong number of arguments to {}", func.name()),
                        });
                    }
                    return Ok(Expr::Call { func, args });
                }
                if self.eat("[") {
                    let index = self.index()?;
                    self.expect("]")?;
                    return Ok(Expr::Indexed { base: name, index });
                }
                if self.indices.contains(&name) {
                    Ok(Expr::Index(name))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            t => Err(ExprError::Syntax { col, message: format!("unexpected {}", describe(&t)) }),
        }
    }

    fn index(&mut self) -> Result<IndexExpr, ExprError> {
        match self.peek().clone() {
            Tok::Ident(v) => {
                if !self.indices.contains(&v) {
                    return Err(self.error(format!("{v:?} is not a sum index in scope")));
                }
                self.bump();
                let offset = if self.eat("+") {
                    self.int()?
                } else if self.eat("-") {
                    -self.int()?
                } else {
                    0
                };
                Ok(IndexExpr { var: Some(v), offset })
            }
            _ => Ok(IndexExpr { var: None, offset: self.int()? }),
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        self.expect("(")?;
        let index = match self.bump() {
            Tok::Ident(name) => name,
            t => return Err(self.error(format!("expected index name, found {}", describe(&t)))),
        };
        self.expect("=")?;
        let lo = self.int()?;
        self.expect("..")?;
        let hi = self.int()?;
        if hi < lo {
            return Err(self.error(format!("empty range {lo}..{hi}")));
        }
        self.expect(",")?;
        self.indices.push(index.clone());
        let body = self.expr();
        self.indices.pop();
        let body = body?;
        self.expect(")")?;
        Ok(Expr::Sum { index, lo, hi, body: Box::new(body) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, f64)]) -> HashMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn budget_sum_parses() {
        let e = parse_expr("x1 + x2 - 100").unwrap();
        assert!(matches!(e, Expr::Binary { op: BinOp::Sub, .. }));
        assert_eq!(e.eval(&env(&[("x1", 50.0), ("x2", 70.0)])).unwrap(), 20.0);
    }

    #[test]
    fn binary_relaxation_measure_parses() {
        let e = parse_expr("min(abs(x1), abs(1 - x1))").unwrap();
        assert!((e.eval(&env(&[("x1", 0.3)])).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn dangling_operator_reports_column() {
        let err = parse_expr("x1 +").unwrap_err();
        assert_eq!(err.col(), 5);
        assert!(matches!(err, ExprError::Syntax { .. }));
    }

    #[test]
    fn unknown_function() {
        assert!(matches!(parse_expr("sin(x)"), Err(ExprError::UnknownFunction { col: 1, .. })));
    }

    #[test]
    fn arithmetic_and_domain_errors() {
        assert_eq!(parse_expr("x1 + x2").unwrap().eval(&env(&[("x1", 50.0), ("x2", 50.0)])).unwrap(), 100.0);
        let err = parse_expr("log(x1)").unwrap().eval(&env(&[("x1", -1.0)])).unwrap_err();
        assert_eq!(err.expr, "log(x1)");
        assert_eq!(parse_expr("x1*x2").unwrap().eval(&env(&[("x1", 0.0), ("x2", -3.0)])).unwrap(), 0.0);
        assert!(parse_expr("1 / (x - 1)").unwrap().eval(&env(&[("x", 1.0)])).is_err());
        assert!(parse_expr("(-8)^0.5").unwrap().eval(&env(&[])).is_err());
        assert!(parse_expr("exp(x)").unwrap().eval(&env(&[("x", 1000.0)])).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let v = |s: &str| parse_expr(s).unwrap().eval(&env(&[])).unwrap();
        assert_eq!(v("2 - 3 - 4"), -5.0);
        assert_eq!(v("2 ^ 3 ^ 2"), 512.0);
        assert_eq!(v("-2 ^ 2"), -4.0);
        assert_eq!(v("2 ^ -1"), 0.5);
        assert_eq!(v("12 / 3 / 2"), 2.0);
        assert_eq!(v("max(1, 5, 3) - min(2, -1)"), 6.0);
    }

    #[test]
    fn indexed_sum() {
        let e = parse_expr("sum(i = 1..3, x[i] * i)").unwrap();
        let vars: Vec<String> = e.variables().unwrap().into_iter().collect();
        assert_eq!(vars, ["x1", "x2", "x3"]);
        assert_eq!(e.eval(&env(&[("x1", 1.0), ("x2", 1.0), ("x3", 1.0)])).unwrap(), 6.0);
        let shifted = parse_expr("sum(i = 1..2, x[i+1] - x[i])").unwrap();
        assert_eq!(shifted.eval(&env(&[("x1", 1.0), ("x2", 4.0), ("x3", 9.0)])).unwrap(), 8.0);
        assert!(parse_expr("x[j]").is_err());
    }

    #[test]
    fn affine_detection() {
        let a = parse_expr("-x1").unwrap().single_var_affine().unwrap();
        assert_eq!((a.var.as_str(), a.coef, a.constant), ("x1", -1.0, 0.0));
        let b = parse_expr("2 * x2 - 3").unwrap().single_var_affine().unwrap();
        assert_eq!((b.coef, b.constant), (2.0, -3.0));
        assert!(parse_expr("x1 + x2").unwrap().single_var_affine().is_none());
        assert!(parse_expr("x1 * x2").unwrap().single_var_affine().is_none());
        assert!(parse_expr("x1 - x1 + 2").unwrap().single_var_affine().is_none());
    }

    #[test]
    fn display_examples() {
        for (src, shown) in [
            ("x1+x2-100", "x1 + x2 - 100"),
            ("a-(b-c)", "a - (b - c)"),
            ("(a^b)^c", "(a^b)^c"),
            ("-(x+1)", "-(x + 1)"),
            ("2 - -3", "2 - -3"),
            ("(-3)^2", "(-3)^2"),
            ("sum(i=1..3,x[i])", "sum(i = 1..3, x[i])"),
        ] {
            assert_eq!(parse_expr(src).unwrap().to_string(), shown);
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn leaf() -> impl Strategy<Value = Expr> {
            prop_oneof![
                (-1000i32..1000).prop_map(|v| Expr::Const(v as f64 / 8.0)),
                prop::sample::select(vec!["x", "y", "z"]).prop_map(Expr::var),
            ]
        }

        fn arb_expr() -> impl Strategy<Value = Expr> {
            leaf().prop_recursive(4, 32, 3, |inner| {
                prop_oneof![
                    inner.clone().prop_map(Expr::negate),
                    (
                        prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]),
                        inner.clone(),
                        inner.clone()
                    )
                        .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
                    inner.clone().prop_map(|a| Expr::Call { func: Func::Abs, args: vec![a] }),
                    (inner.clone(), inner).prop_map(|(a, b)| Expr::Call { func: Func::Max, args: vec![a, b] }),
                ]
            })
        }

        proptest! {
            #[test]
            fn print_then_parse_is_identity(e in arb_expr()) {
                let text = e.to_string();
                prop_assert_eq!(parse_expr(&text).unwrap(), e);
            }
        }
    }
}
