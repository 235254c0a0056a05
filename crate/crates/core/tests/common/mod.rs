#![allow(dead_code)]

use std::path::{Path, PathBuf};

use qrak::problem::{parse_problem, ProblemInstance};

pub const BLACKBOX: &str = env!("CARGO_BIN_EXE_qrak-blackbox");
pub const QRAK: &str = env!("CARGO_BIN_EXE_qrak");

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Fixture text with the black-box placeholder filled in.
pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("{name}: {e}"))
        .replace("@BLACKBOX@", BLACKBOX)
}

pub fn fixture(name: &str) -> ProblemInstance {
    parse_problem(&fixture_text(name)).unwrap_or_else(|d| panic!("{name}: {d:?}"))
}

/// Copies a fixture into `dir`, filling the placeholder.
pub fn install(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, fixture_text(name)).unwrap();
    path
}
