//! `qrak-blackbox <name>`: reads a point on stdin, writes outputs on stdout.

use std::io::{Read, Write};
use std::process::ExitCode;

use qrak::blackbox;
use qrak::sim::ExitKind;

fn main() -> ExitCode {
    let Some(name) = std::env::args().nth(1) else {
        eprintln!("usage: qrak-blackbox <{}>", blackbox::NAMES.join("|"));
        return ExitCode::from(64);
    };
    let Some(f) = blackbox::by_name(&name) else {
        eprintln!("unknown black box {name:?}");
        return ExitCode::from(64);
    };
    let mut input = String::new();
    if let Err(e) = std::io::stdin().read_to_string(&mut input) {
        eprintln!("cannot read input: {e}");
        return ExitCode::from(64);
    }
    let run = f(&input);
    print!("{}", run.stdout);
    eprint!("{}", run.stderr);
    let _ = std::io::stdout().flush();
    match run.exit {
        ExitKind::Code(c) => ExitCode::from(c as u8),
        ExitKind::Signal(_) => std::process::abort(),
    }
}
