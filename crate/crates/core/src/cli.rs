//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::blackbox;
use crate::evaluator::{EvalPolicy, EvaluationFault};
use crate::problem::{parse_problem_with_diagnostics, reformulation_hints, Diagnostic, ProblemInstance, Severity};
use crate::sim::{Harness, HarnessError};
use crate::solver::{solve, SolveError, SolveOptions};
use crate::taxonomy::{enumerate_classes, parse_class_code, ConstraintClass, ParsedCode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_STRICT_WARNINGS: i32 = 3;
pub const EXIT_NO_SOLUTION: i32 = 4;
pub const EXIT_SPAWN_FAILURE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "qrak", version, about = "Constraint-class-aware black-box optimization")]
pub struct Cli {
    /// Base directory for problem files, reports and transcripts.
    #[arg(long, global = true, default_value = ".")]
    pub workdir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the class of every constraint.
    Classify {
        path: Option<PathBuf>,
        /// Also print the nine leaf classes.
        #[arg(long)]
        legend: bool,
    },
    /// Check a problem file.
    Validate {
        path: PathBuf,
        /// Treat warnings as failures.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Optimize a problem.
    Solve(SolveArgs),
    /// Suggest reformulations toward easier classes.
    Hints { path: PathBuf },
    /// List the classes matched by a code or wildcard pattern.
    Match { pattern: String },
}

#[derive(Debug, clap::Args)]
pub struct SolveArgs {
    pub path: PathBuf,
    /// Start point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub delta0: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub delta_min: f64,
    #[arg(long)]
    pub delta_max: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub budget_evals: usize,
    #[arg(long)]
    pub budget_sims: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluate poll points in seeded random order.
    #[arg(long)]
    pub shuffle_poll: bool,
    /// Skip simulations at points violating a relaxable a priori constraint.
    #[arg(long)]
    pub skip_sim_on_relaxable_apriori: bool,
    /// Recover from a start point outside the unrelaxable a priori constraints.
    #[arg(long)]
    pub restoration: bool,
    /// Output directory for reports and transcripts.
    #[arg(long, default_value = "qrak-run")]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let wd = &cli.workdir;
    match &cli.command {
        Command::Classify { path, legend } => cmd_classify(wd, path.as_deref(), *legend, out, err),
        Command::Validate { path, strict, format } => cmd_validate(&wd.join(path), *strict, *format, out, err),
        Command::Solve(args) => cmd_solve(wd, args, out, err),
        Command::Hints { path } => cmd_hints(&wd.join(path), out, err),
        Command::Match { pattern } => cmd_match(pattern, out, err),
    }
}

/// Reads and parses a problem file; on failure prints diagnostics to `err`.
fn load(path: &Path, err: &mut dyn Write) -> std::io::Result<(Option<ProblemInstance>, Vec<Diagnostic>)> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "error: cannot read {}: {e}", path.display())?;
            return Ok((None, Vec::new()));
        }
    };
    let (instance, diags) = parse_problem_with_diagnostics(&text);
    let failed = instance.is_none() || diags.iter().any(Diagnostic::is_error);
    if failed {
        for d in &diags {
            writeln!(err, "{}: {d}", path.display())?;
        }
        return Ok((None, diags));
    }
    Ok((instance, diags))
}

fn print_warnings(path: &Path, diags: &[Diagnostic], err: &mut dyn Write) -> std::io::Result<()> {
    for d in diags.iter().filter(|d| d.severity == Severity::Warning) {
        writeln!(err, "{}: {d}", path.display())?;
    }
    Ok(())
}

fn describe(class: ConstraintClass) -> String {
    let q = if class.is_quantifiable() { "quantifiable" } else { "nonquantifiable" };
    let r = if class.is_relaxable() { "relaxable" } else { "unrelaxable" };
    let a = if class.is_a_priori() { "a priori" } else { "simulation" };
    let k = if class.is_hidden() { "hidden" } else { "known" };
    format!("{q}, {r}, {a}, {k}")
}

pub fn legend() -> String {
    let mut s = String::from("leaf  class  description\n");
    for class in enumerate_classes() {
        s.push_str(&format!("{:>4}  {}   {}\n", class.leaf_index(), class, describe(class)));
    }
    s
}

pub fn classify_table(instance: &ProblemInstance) -> String {
    let width = instance.constraints.iter().map(|c| c.name.len()).max().unwrap_or(0).max(4);
    let mut s = format!("{:<width$}  class  leaf  kind   binding\n", "name");
    for c in &instance.constraints {
        s.push_str(&format!(
            "{:<width$}  {}   {:>4}  {:<5}  {}\n",
            c.name,
            c.class,
            c.class.leaf_index(),
            c.kind().short(),
            c.binding_text()
        ));
    }
    s
}

fn cmd_classify(
    wd: &Path,
    path: Option<&Path>,
    legend_too: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::io::Result<i32> {
    let Some(path) = path else {
        if legend_too {
            write!(out, "{}", legend())?;
            return Ok(EXIT_OK);
        }
        writeln!(err, "error: classify needs a problem file or --legend")?;
        return Ok(EXIT_INVALID);
    };
    let path = wd.join(path);
    let (Some(instance), diags) = load(&path, err)? else { return Ok(EXIT_INVALID) };
    print_warnings(&path, &diags, err)?;
    write!(out, "{}", classify_table(&instance))?;
    if legend_too {
        writeln!(out)?;
        write!(out, "{}", legend())?;
    }
    Ok(EXIT_OK)
}

fn diagnostics_csv(diags: &[Diagnostic]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
    w.write_record(["severity", "code", "line", "col", "subject", "message"]).expect("in-memory write");
    for d in diags {
        let severity = match d.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        w.write_record([
            severity.to_string(),
            d.code.to_string(),
            opt(d.line),
            opt(d.col),
            d.subject.clone().unwrap_or_default(),
            d.message.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn cmd_validate(path: &Path, strict: bool, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "error: cannot read {}: {e}", path.display())?;
            return Ok(EXIT_INVALID);
        }
    };
    let (instance, diags) = parse_problem_with_diagnostics(&text);
    match format {
        Format::Csv => write!(out, "{}", diagnostics_csv(&diags))?,
        Format::Text => {
            for d in &diags {
                writeln!(out, "{}: {d}", path.display())?;
            }
        }
    }
    let errors = diags.iter().filter(|d| d.is_error()).count();
    let warnings = diags.len() - errors;
    if instance.is_none() || errors > 0 {
        return Ok(EXIT_INVALID);
    }
    if format == Format::Text {
        writeln!(out, "{}: ok ({warnings} warning(s))", path.display())?;
    }
    Ok(if strict && warnings > 0 { EXIT_STRICT_WARNINGS } else { EXIT_OK })
}

fn cmd_hints(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let (Some(instance), _) = load(path, err)? else { return Ok(EXIT_INVALID) };
    let hints = reformulation_hints(&instance);
    if hints.is_empty() {
        writeln!(out, "no reformulation hints")?;
    }
    for h in hints {
        writeln!(out, "{h}")?;
    }
    Ok(EXIT_OK)
}

fn cmd_match(pattern: &str, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let parsed = match parse_class_code(pattern) {
        Ok(p) => p,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_INVALID);
        }
    };
    for class in parsed.matching_classes() {
        writeln!(out, "{class}  leaf {}", class.leaf_index())?;
    }
    if let ParsedCode::Pattern(p) = parsed {
        if p.has_knowledge_wildcard() {
            writeln!(err, "note: a wildcard in the last slot only adds NUSH")?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_solve(wd: &Path, args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let path = wd.join(&args.path);
    let (Some(instance), diags) = load(&path, err)? else { return Ok(EXIT_INVALID) };
    print_warnings(&path, &diags, err)?;

    let x0 = match &args.x0 {
        Some(text) => match instance.parse_point(text) {
            Ok(x) => Some(x),
            Err(e) => {
                writeln!(err, "error: --x0: {e}")?;
                return Ok(EXIT_INVALID);
            }
        },
        None => None,
    };
    let opts = SolveOptions {
        x0,
        delta0: args.delta0,
        delta_min: args.delta_min,
        delta_max: args.delta_max,
        budget_evals: args.budget_evals,
        budget_sims: args.budget_sims,
        seed: args.seed,
        shuffle_poll: args.shuffle_poll,
        eval_policy: EvalPolicy { skip_sim_on_relaxable_apriori: args.skip_sim_on_relaxable_apriori },
        restoration: args.restoration,
    };

    let out_dir = wd.join(&args.out);
    let transcripts = out_dir.join("transcripts");
    fs::create_dir_all(&transcripts)?;
    let mut harness = Harness::new().with_transcripts(&transcripts).with_working_dir(wd);
    blackbox::register_all(&mut harness);

    let report = match solve(&instance, &harness, &opts) {
        Ok(r) => r,
        Err(SolveError::Evaluation(EvaluationFault::Harness(e))) => {
            writeln!(err, "error: {e}")?;
            return Ok(match e {
                HarnessError::SpawnFailure { .. } | HarnessError::UnknownFunction { .. } => EXIT_SPAWN_FAILURE,
                HarnessError::Transcript { .. } => EXIT_INVALID,
            });
        }
        Err(e @ SolveError::InfeasibleStart(_)) => {
            writeln!(err, "error: {e}")?;
            writeln!(out, "no acceptable solution found")?;
            return Ok(EXIT_NO_SOLUTION);
        }
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_INVALID);
        }
    };

    let summary = report.to_text(&instance);
    fs::write(out_dir.join("history.csv"), report.history_csv())?;
    fs::write(out_dir.join("report.txt"), &summary)?;
    fs::write(out_dir.join("policy_trace.txt"), report.trace.to_table())?;
    write!(out, "{summary}")?;
    Ok(if report.best.is_some() { EXIT_OK } else { EXIT_NO_SOLUTION })
}
