//! `restrictlab`: seeded experiments on the parabola over (Z/NZ)^2 with
//! CSV/JSON reports.
//!
//! Exit codes: 0 success, 1 a certified inequality or recovery guarantee
//! was violated, 2 usage error.

mod args;
mod commands;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::args::Cli;

const THREADS_VAR: &str = "RESTRICTLAB_THREADS";

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("restrictlab: {msg}");
        return ExitCode::from(2);
    }
    let start = Instant::now();
    let outcome = commands::run(cli.command);
    // wall time goes to stderr so report files stay byte-identical
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(o) if o.violations == 0 => {
            eprintln!("restrictlab: ok ({elapsed:.3}s)");
            ExitCode::SUCCESS
        }
        Ok(o) => {
            eprintln!("restrictlab: {} violation(s) ({elapsed:.3}s)", o.violations);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("restrictlab: {e}");
            ExitCode::from(2)
        }
    }
}
