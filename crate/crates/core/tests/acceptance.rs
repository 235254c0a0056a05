//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use qrak::blackbox;
use qrak::evaluator::{evaluate_point, is_acceptable_solution, EvalPolicy, Stage};
use qrak::problem::{parse_problem, violation_measure, Measure, ProblemInstance};
use qrak::sim::{interpret_outcome, ConstraintResult, EvalResult, Harness, SimStatus};
use qrak::solver::{solve, IncumbentKind, SolveOptions, SolveReport, Treatment, HIDDEN_ROW};
use qrak::taxonomy::{
    enumerate_classes, format_class, make_class, parse_class_code, Availability, ConstraintClass, Knowledge,
    ParsedCode, Quantifiability, Relaxability,
};

type Outcome = Result<String, String>;
type Criterion = (u8, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($msg)+)),
        }
    };
}

fn harness() -> Harness {
    let mut h = Harness::new();
    blackbox::register_all(&mut h);
    h
}

fn run_from(inst: &ProblemInstance, x0: Vec<f64>) -> SolveReport {
    solve(inst, &harness(), &SolveOptions { x0: Some(x0), ..SolveOptions::default() }).expect("solve")
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let expected = [
        ConstraintClass::QRAK,
        ConstraintClass::NRAK,
        ConstraintClass::QUAK,
        ConstraintClass::NUAK,
        ConstraintClass::QRSK,
        ConstraintClass::NRSK,
        ConstraintClass::QUSK,
        ConstraintClass::NUSK,
        ConstraintClass::NUSH,
    ];
    let codes = ["QRAK", "NRAK", "QUAK", "NUAK", "QRSK", "NRSK", "QUSK", "NUSK", "NUSH"];
    let classes = enumerate_classes();
    ensure!(classes == expected, "order {classes:?}");
    for (i, (c, code)) in classes.iter().zip(codes).enumerate() {
        ensure!(c.code() == code && c.leaf_index() as usize == i + 1, "{c} at {i}");
    }
    let mut accepted = 0;
    let mut rejected = Vec::new();
    for q in [Quantifiability::Quantifiable, Quantifiability::Nonquantifiable] {
        for r in [Relaxability::Relaxable, Relaxability::Unrelaxable] {
            for a in [Availability::APriori, Availability::Simulation] {
                for k in [Knowledge::Known, Knowledge::Hidden] {
                    match make_class(q, r, a, k) {
                        Ok(_) => accepted += 1,
                        Err(_) => rejected.push((q, r, a, k)),
                    }
                }
            }
        }
    }
    ensure!(accepted == 9 && rejected.len() == 7, "{accepted} accepted, {} rejected", rejected.len());
    ensure!(rejected.iter().all(|t| t.3 == Knowledge::Hidden), "a known combination was rejected");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok("9 classes in order; 16 combinations, 7 hidden ones rejected".into())
}

fn criterion_2() -> Outcome {
    for c in enumerate_classes() {
        let text = format_class(c);
        ensure!(parse_class_code(&text) == Ok(ParsedCode::Class(c)), "roundtrip {text}");
    }
    let q_ak = parse_class_code("Q*AK").map_err(|e| e.to_string())?.matching_classes();
    ensure!(q_ak == [ConstraintClass::QRAK, ConstraintClass::QUAK], "Q*AK → {q_ak:?}");
    let sim = parse_class_code("**S*").map_err(|e| e.to_string())?.matching_classes();
    let want = [
        ConstraintClass::QRSK,
        ConstraintClass::NRSK,
        ConstraintClass::QUSK,
        ConstraintClass::NUSK,
        ConstraintClass::NUSH,
    ];
    ensure!(sim == want, "**S* → {sim:?}");
    for p in ["Q*AK", "**S*"] {
        let parsed = parse_class_code(p).unwrap();
        let ParsedCode::Pattern(pat) = parsed else { return Err(format!("{p} parsed as a class")) };
        ensure!(pat.to_string() == p, "pattern roundtrip {p}");
    }
    Ok("9 codes roundtrip; Q*AK and **S* match exactly".into())
}

/// Cases of criterion 3 whose target is unattainable by any solver: the
/// instance's feasible set is unbounded below in the objective.
const UNATTAINABLE: [&str; 1] = ["omega1"];

fn omega_case(name: &str) -> Result<(), String> {
    let inst = fixture(&format!("{name}.qrak"));
    let r = run_from(&inst, vec![1.0, 1.0]);
    let best = r.best.ok_or("no acceptable solution")?;
    ensure!(
        best.x.iter().all(|v| v.abs() <= 1e-6) && best.f.abs() <= 1e-6,
        "best x = {:?}, f = {}",
        best.x,
        best.f
    );
    Ok(())
}

/// Criterion 3 split into its sub-cases; `(name, result)`.
fn criterion_3_cases() -> Vec<(&'static str, Result<(), String>)> {
    let mut cases = Vec::new();
    for name in ["omega", "omega1", "omega2", "omega3"] {
        cases.push((name, omega_case(name)));
    }
    let omega4 = (|| {
        let inst = fixture("omega4.qrak");
        let h = harness();
        let at = |x: Vec<f64>| evaluate_point(&inst, &h, &x, EvalPolicy::default()).unwrap();
        let origin = at(vec![0.0, 0.0]);
        let off = at(vec![1e-3, 0.0]);
        ensure!(origin.is_feasible() && is_acceptable_solution(&origin, &inst), "(0,0) not feasible");
        ensure!(!off.is_feasible() && off.unrelaxable_violated, "(1e-3,0) not infeasible");
        Ok(())
    })();
    cases.push(("omega4", omega4));
    cases
}

/// `(0, -t)` satisfies both constraints of Ω₁ for every `t`, with `f = -t`.
fn omega1_is_unbounded() -> bool {
    let inst = fixture("omega1.qrak");
    let h = harness();
    [1.0, 1e3, 1e9].iter().all(|t| {
        let e = evaluate_point(&inst, &h, &[0.0, -t], EvalPolicy::default()).unwrap();
        e.is_feasible() && e.f == -t
    })
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let cases = criterion_3_cases();
    let elapsed = start.elapsed();
    let failed: Vec<String> = cases
        .iter()
        .filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}")))
        .collect();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    ensure!(failed.is_empty(), "{}", failed.join("; "));
    Ok(format!("all instances reach (0,0) in {elapsed:.2?}"))
}

fn criterion_4() -> Outcome {
    let inst = fixture("staging.qrak");
    // 100 points on a grid; 40 violate an unrelaxable a priori constraint.
    let h = harness();
    let mut evals = Vec::new();
    let mut violating = 0;
    for i in 0..100 {
        let (a, b) = ((i % 10) as f64, (i / 10) as f64);
        let x = if i % 5 < 2 {
            violating += 1;
            if i % 2 == 0 { vec![-a - 1.0, -b] } else { vec![4.0 + a, b] }
        } else {
            vec![a * 0.25, b]
        };
        evals.push(evaluate_point(&inst, &h, &x, EvalPolicy::default()).map_err(|e| e.to_string())?);
    }
    ensure!(violating == 40, "fixture has {violating} violating points");
    let rejected: Vec<_> = evals.iter().filter(|e| e.stage == Stage::RejectedAPriori).collect();
    ensure!(rejected.len() == 40, "{} rejected", rejected.len());
    ensure!(rejected.iter().all(|e| e.sim_calls_used == 0 && e.sims.is_empty()), "a rejected point ran a simulation");
    let executions = h.counters().executions;
    ensure!(executions == 60, "{executions} executions for 60 admissible points");

    let r = run_from(&inst, vec![1.0, 1.0]);
    let rejected_rows = r.history.iter().filter(|row| row.eval.stage == Stage::RejectedAPriori);
    ensure!(rejected_rows.clone().all(|row| row.eval.sim_calls_used == 0), "solver ran a sim at a rejected point");
    let c = r.counters;
    ensure!(c.rejected_a_priori > 0, "solver rejected nothing");
    ensure!(
        c.sim_executions + c.rejected_a_priori as u64 <= c.evaluations as u64,
        "executions {} + rejected {} exceed evaluations {}",
        c.sim_executions,
        c.rejected_a_priori,
        c.evaluations
    );
    ensure!((c.sim_executions as usize) < c.evaluations, "{} sims for {} points", c.sim_executions, c.evaluations);
    Ok(format!(
        "batch 60/100 executions; solver {} sims for {} points, {} rejected a priori",
        c.sim_executions, c.evaluations, c.rejected_a_priori
    ))
}

fn criterion_5() -> Outcome {
    let inst = fixture("log.qrak");
    let r = run_from(&inst, vec![4.0]);
    let best = r.best.as_ref().ok_or("no acceptable solution")?;
    ensure!((best.x[0] - 1.0).abs() <= 1e-3, "best x = {}", best.x[0]);
    let nonpositive: Vec<_> = r.history.iter().filter(|row| row.eval.x[0] <= 0.0).collect();
    ensure!(!nonpositive.is_empty(), "no trial reached x <= 0");
    for row in &nonpositive {
        let e = &row.eval;
        ensure!(e.hidden_event && e.f == f64::INFINITY, "x = {} not a hidden event with f = inf", e.x[0]);
        ensure!(
            e.results.iter().all(|res| matches!(res, EvalResult::HiddenEvent { .. })),
            "x = {} has results besides the hidden event",
            e.x[0]
        );
    }
    let hidden_rows = r.history.iter().filter(|row| row.eval.hidden_event).count();
    ensure!(hidden_rows == nonpositive.len(), "{hidden_rows} hidden events for {} trials", nonpositive.len());
    let fired = r.trace.get(HIDDEN_ROW, Treatment::ExtremeBarrier).map(|t| t.fired).unwrap_or(0);
    ensure!(fired == hidden_rows, "trace records {fired} hidden events");
    let csv = r.history_csv();
    let logged = csv.lines().skip(1).filter(|l| l.split(',').nth(5) == Some("true")).count();
    ensure!(logged == hidden_rows, "history logs {logged} hidden events");
    Ok(format!("x* = {}, {} hidden events at x <= 0", best.x[0], hidden_rows))
}

fn check_styrene(r: &SolveReport, inst: &ProblemInstance) -> Result<(), String> {
    for g in 1..=7 {
        let name = format!("g{g}");
        ensure!(r.trace.treatments(&name) == [Treatment::ProgressiveBarrier], "{name}: {:?}", r.trace.treatments(&name));
    }
    for k in 1..=4 {
        let name = format!("fail{k}");
        ensure!(r.trace.treatments(&name) == [Treatment::ExtremeBarrier], "{name}: {:?}", r.trace.treatments(&name));
    }
    let pb = r.trace.order.iter().filter(|(_, _, t)| *t == Treatment::ProgressiveBarrier).count();
    let eb = r.trace.order.iter().filter(|(n, _, t)| *t == Treatment::ExtremeBarrier && n != HIDDEN_ROW).count();
    ensure!(pb == 7 && eb == 4, "{pb} progressive, {eb} extreme");
    for row in r.history.iter().filter(|row| row.incumbent.is_some()) {
        for k in 1..=4 {
            let res = row.eval.result(&format!("fail{k}"));
            ensure!(
                res.and_then(ConstraintResult::satisfied) == Some(true),
                "incumbent {:?} violates fail{k}",
                row.eval.x
            );
        }
    }
    let best = r.best.as_ref().ok_or("no acceptable solution")?;
    let e = evaluate_point(inst, &harness(), &best.x, EvalPolicy::default()).map_err(|e| e.to_string())?;
    ensure!(is_acceptable_solution(&e, inst), "best {:?} is not acceptable", best.x);
    for c in &inst.constraints {
        let ok = match e.result(&c.name) {
            Some(ConstraintResult::Quantified(v)) => {
                v.feasible || v.violation.value().is_some_and(|m| m <= c.tolerance.unwrap_or(0.0))
            }
            Some(res) => res.satisfied() == Some(true),
            None => false,
        };
        ensure!(ok, "best violates {}", c.name);
    }
    Ok(())
}

fn criterion_6() -> Outcome {
    let inst = fixture("styrene.qrak");
    let plain = run_from(&inst, vec![1.0, 1.0]);
    check_styrene(&plain, &inst)?;
    let crafted = run_from(&inst, vec![6.0, 6.0]);
    check_styrene(&crafted, &inst)?;
    ensure!(crafted.history[0].eval.h == 40.0, "crafted start h = {}", crafted.history[0].eval.h);
    let infeasible = crafted
        .history
        .iter()
        .filter(|row| row.incumbent == Some(IncumbentKind::Infeasible) && row.eval.h > 0.0)
        .count();
    ensure!(infeasible > 0, "no infeasible incumbent on the crafted start");
    let best = crafted.best.unwrap();
    Ok(format!("7 PB + 4 EB; {infeasible} infeasible incumbents; best {:?} f = {}", best.x, best.f))
}

fn rel_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn criterion_7() -> Outcome {
    let inst = parse_problem(
        "problem \"measures\"\nvar x1 real\nvar x2 real\nvar x3 real\nvar x4 real\nvar x5 real\nminimize expr \"x1\"\n\
         constraint budget class QRAK tol 0 expr \"x1 + x2 + x3 + x4 + x5 <= 100\"\n\
         constraint binary class QRAK tol 0 expr \"min(abs(x1), abs(1 - x1)) == 0\"\n",
    )
    .map_err(|d| format!("{d:?}"))?;
    let budget = inst.constraint("budget").unwrap();
    let binary = inst.constraint("binary").unwrap();
    let measure = |c: &qrak::problem::Constraint, x: &[f64]| -> Result<f64, String> {
        let raw = c.a_priori_expr().unwrap().eval(&inst.env(x)).map_err(|e| e.to_string())?;
        match violation_measure(c, raw).map_err(|e| e.to_string())?.violation {
            Measure::Quantified(v) => Ok(v),
            Measure::Unquantified => Err("unquantified".into()),
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_101);
    let mut budget_violated = 0;
    for i in 0..1000 {
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-10.0..50.0)).collect();
        let mut total = 0.0;
        for v in &x {
            total += v;
        }
        let oracle = if total > 100.0 { total - 100.0 } else { 0.0 };
        if oracle > 0.0 {
            budget_violated += 1;
        }
        let got = measure(budget, &x)?;
        ensure!(rel_close(got, oracle), "point {i}: budget {got} vs {oracle}");

        let mut y = x.clone();
        y[0] = rng.gen_range(-2.0..3.0);
        let oracle = [0.0, 1.0].iter().map(|b: &f64| (y[0] - b).abs()).fold(f64::INFINITY, f64::min);
        let got = measure(binary, &y)?;
        ensure!(rel_close(got, oracle), "point {i}: binary {got} vs {oracle}");
    }
    ensure!(budget_violated > 0 && budget_violated < 1000, "sample never crosses the budget");
    Ok(format!("1000 points, {budget_violated} over budget, all within 1e-12"))
}

fn criterion_8() -> Outcome {
    let inst = fixture("outcomes.qrak");
    let h = harness();
    let run = |sim: &str, x: f64| {
        let spec = inst.simulation(sim).unwrap();
        let out = h.run_simulation(spec, &inst.serialize_point(&[x])).expect("spawn");
        let results = interpret_outcome(&out, spec, &inst);
        (out.status, results)
    };
    let constraint = |results: &[EvalResult], name: &str| {
        results.iter().find_map(|r| match r {
            EvalResult::Constraint { name: n, result } if n == name => Some(result.clone()),
            _ => None,
        })
    };
    let is_hidden = |results: &[EvalResult]| {
        results.len() == 1 && matches!(results[0], EvalResult::HiddenEvent { .. })
    };

    let (status, res) = run("conc", 0.5);
    ensure!(status == SimStatus::Completed, "conc(0.5): {status}");
    ensure!(constraint(&res, "ca").and_then(|r| r.satisfied()) == Some(true), "ca at 0.5");

    let (status, res) = run("conc", 2.0);
    ensure!(status == SimStatus::PartialOutputs, "conc(2): {status}");
    ensure!(matches!(constraint(&res, "ca"), Some(ConstraintResult::Unknown(_))), "ca at 2: {res:?}");

    let (status, res) = run("err", -1.0);
    ensure!(status == SimStatus::ErrorCode(blackbox::DIVERGED_CODE), "err(-1): {status}");
    ensure!(constraint(&res, "diverged") == Some(ConstraintResult::Boolean(false)), "diverged: {res:?}");
    ensure!(!res.iter().any(|r| matches!(r, EvalResult::HiddenEvent { .. })), "documented code raised a hidden event");

    let (status, res) = run("err", 200.0);
    ensure!(status == SimStatus::Crashed, "err(200): {status}");
    ensure!(is_hidden(&res), "undocumented code: {res:?}");

    let (status, res) = run("crash", -1.0);
    ensure!(status == SimStatus::Crashed, "crash: {status}");
    ensure!(is_hidden(&res), "crash: {res:?}");

    let start = Instant::now();
    let (status, res) = run("slow", 10.0);
    let waited = start.elapsed();
    ensure!(status == SimStatus::TimedOut, "slow: {status}");
    ensure!(waited < Duration::from_secs(5), "timeout took {waited:?}");
    ensure!(constraint(&res, "runtime").and_then(|r| r.satisfied()) == Some(false), "runtime: {res:?}");

    let (status, _) = run("slow", 0.0);
    ensure!(status == SimStatus::Completed, "slow(0): {status}");
    Ok("Completed, PartialOutputs, ErrorCode, Crashed, TimedOut mapped".into())
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    install(dir.path(), "styrene_external.qrak");
    let solve_into = |out: &str| -> Result<Vec<u8>, String> {
        let status = Command::new(QRAK)
            .args(["--workdir", dir.path().to_str().unwrap(), "solve", "styrene_external.qrak"])
            .args(["--x0", "6,6", "--seed", "11", "--shuffle-poll", "--out", out])
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(status.status.code() == Some(0), "exit {:?}", status.status.code());
        std::fs::read(dir.path().join(out).join("history.csv")).map_err(|e| e.to_string())
    };
    let a = solve_into("run-a")?;
    let b = solve_into("run-b")?;
    ensure!(a == b, "history.csv differs between runs");
    Ok(format!("history.csv identical ({} bytes)", a.len()))
}

fn guarded(f: fn() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "taxonomy completeness", criterion_1),
        (2, "code algebra", criterion_2),
        (3, "instance equivalence", criterion_3),
        (4, "evaluation staging", criterion_4),
        (5, "hidden constraint handling", criterion_5),
        (6, "policy dispatch", criterion_6),
        (7, "violation measure oracle", criterion_7),
        (8, "harness outcome mapping", criterion_8),
        (9, "determinism", criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (n, name, f) in criteria {
        match guarded(f) {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(why) => {
                println!("FAIL criterion {n} ({name}): {why}");
                if n != 3 {
                    unexpected.push(n);
                }
            }
        }
    }

    // Criterion 3 may only fail on cases known to be unattainable, and then
    // only for the documented reason.
    for (name, result) in criterion_3_cases() {
        match result {
            Ok(()) => println!("  criterion 3 {name}: PASS"),
            Err(e) if UNATTAINABLE.contains(&name) => {
                println!("  criterion 3 {name}: FAIL (unattainable: f is unbounded below on this instance; {e})");
                assert!(omega1_is_unbounded(), "{name} failed but the instance is not unbounded");
            }
            Err(e) => {
                println!("  criterion 3 {name}: FAIL {e}");
                unexpected.push(3);
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
