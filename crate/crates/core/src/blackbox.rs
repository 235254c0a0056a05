//! Demonstration black boxes, available in-process and through the
//! `qrak-blackbox` executable.

use std::thread;
use std::time::Duration;

use crate::sim::{Harness, RawRun};

pub const NAMES: [&str; 7] = ["log", "sleep", "concentration", "errcode", "styrene", "toxicity", "sum"];

/// Exit code `errcode` documents as "inner solver diverged".
pub const DIVERGED_CODE: i32 = 3;
/// Exit code `errcode` uses without documentation.
pub const UNDOCUMENTED_CODE: i32 = 7;

fn inputs(payload: &str) -> Result<Vec<f64>, RawRun> {
    payload
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| RawRun::code(64, format!("bad input {t:?}"))))
        .collect()
}

fn first(payload: &str) -> Result<f64, RawRun> {
    inputs(payload)?.first().copied().ok_or_else(|| RawRun::code(64, "no input"))
}

fn line(values: &[f64]) -> String {
    let parts: Vec<String> = values
        .iter()
        .map(|v| if v.is_nan() { "NaN".to_string() } else { v.to_string() })
        .collect();
    parts.join(" ") + "\n"
}

/// `(ln x)^2`; aborts for `x <= 0`.
pub fn log(payload: &str) -> RawRun {
    match first(payload) {
        Ok(x) if x > 0.0 => RawRun::success(line(&[x.ln().powi(2)])),
        Ok(x) => RawRun::abort(format!("log of nonpositive value {x}")),
        Err(run) => run,
    }
}

/// Sleeps for the given number of seconds, then echoes it.
pub fn sleep(payload: &str) -> RawRun {
    match first(payload) {
        Ok(s) => {
            thread::sleep(Duration::from_secs_f64(s.max(0.0)));
            RawRun::success(line(&[s]))
        }
        Err(run) => run,
    }
}

/// Outputs `c_A c_B c_C c_S`. Above `x = 1` the inner solver fails and every
/// concentration except `c_S` reads NaN.
pub fn concentration(payload: &str) -> RawRun {
    match first(payload) {
        Ok(x) => {
            let c_s = 1.0 / (1.0 + x * x);
            if x > 1.0 {
                RawRun::success(line(&[f64::NAN, f64::NAN, f64::NAN, c_s]))
            } else {
                RawRun::success(line(&[x, 1.0 - x, x * (1.0 - x), c_s]))
            }
        }
        Err(run) => run,
    }
}

/// Echoes `x`; exits 3 for `x < 0` and 7 for `x > 100`.
pub fn errcode(payload: &str) -> RawRun {
    match first(payload) {
        Ok(x) if x < 0.0 => RawRun::code(DIVERGED_CODE, "inner solver diverged"),
        Ok(x) if x > 100.0 => RawRun::code(UNDOCUMENTED_CODE, "internal error"),
        Ok(x) => RawRun::success(line(&[x])),
        Err(run) => run,
    }
}

/// Twelve outputs over `(x1, x2)`: the objective, seven inequality values
/// (feasible when `<= 0`) and four failure flags (feasible when 0).
pub fn styrene_outputs(x1: f64, x2: f64) -> [f64; 12] {
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    [
        (x1 - 8.0).powi(2) + (x2 - 8.0).powi(2),
        x1 + x2 - 10.0,
        x1 - 7.0,
        x2 - 7.0,
        x1 - 2.0 * x2 - 2.0,
        x2 - 2.0 * x1 - 2.0,
        x1 * x2 - 30.0,
        (x1 - 5.0).powi(2) + (x2 - 5.0).powi(2) - 30.0,
        flag(x1 > 9.5),
        flag(x2 > 9.5),
        flag(x1 + x2 < 1.0),
        flag((x1 - x2).abs() > 6.0),
    ]
}

pub fn styrene(payload: &str) -> RawRun {
    match inputs(payload) {
        Ok(v) if v.len() == 2 => RawRun::success(line(&styrene_outputs(v[0], v[1]))),
        Ok(v) => RawRun::code(64, format!("expected 2 inputs, got {}", v.len())),
        Err(run) => run,
    }
}

/// Outputs `(x - 2)^2` and a toxicity flag that is 1 above `x = 3`.
pub fn toxicity(payload: &str) -> RawRun {
    match first(payload) {
        Ok(x) => RawRun::success(line(&[(x - 2.0).powi(2), if x > 3.0 { 1.0 } else { 0.0 }])),
        Err(run) => run,
    }
}

/// Sum of all inputs.
pub fn sum(payload: &str) -> RawRun {
    match inputs(payload) {
        Ok(v) => RawRun::success(line(&[v.iter().sum()])),
        Err(run) => run,
    }
}

pub fn by_name(name: &str) -> Option<fn(&str) -> RawRun> {
    Some(match name {
        "log" => log,
        "sleep" => sleep,
        "concentration" => concentration,
        "errcode" => errcode,
        "styrene" => styrene,
        "toxicity" => toxicity,
        "sum" => sum,
        _ => return None,
    })
}

/// Registers every demo function under its name.
pub fn register_all(harness: &mut Harness) {
    for name in NAMES {
        let f = by_name(name).expect("listed name");
        harness.register(name, f);
    }
}
