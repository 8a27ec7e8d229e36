//! Library side of the `tjd` binary, exposed so integration tests can drive
//! it in-process.

pub mod args;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod report;

use std::io::Write;

use clap::Parser;

use crate::args::Cli;
use crate::error::{CliError, CliResult};

/// Worker count for the global rayon pool.
pub const THREADS_ENV: &str = "TJD_THREADS";

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    if n == 0 {
        return Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")));
    }
    // A second initialisation in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: &Cli) -> CliResult<()> {
    init_threads()?;
    let out = commands::run_command(&cli.command)?;
    let json = out.report.to_json();
    if let Some(path) = &cli.report {
        std::fs::write(path, format!("{json}\n"))
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    }
    // A closed pipe downstream (e.g. `| head`) is not an error.
    let _ = writeln!(std::io::stdout().lock(), "{json}");
    eprintln!("{}", out.summary);
    Ok(())
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let argv = match config::merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
