//! Batch harness for `pullback-core`: JSON configs, seeded runs and
//! machine-readable reports.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod sweep;

use std::ffi::OsString;

use clap::Parser;
use serde_json::{Map, Value};

pub use config::{Command, ExperimentConfig, RunSpec, SeedSource};
pub use error::{CliError, Result};
pub use report::{Artifact, Report};

/// Parses `args` into a resolved run; `env_seed` is the value of
/// `PULLBACK_SEED`, if set.
pub fn parse_run(cli: &args::Cli, env_seed: Option<&str>) -> Result<RunSpec> {
    let command = cli.command.command();
    let mut spec = config::resolve(command, &cli.flags(), cli.command.overrides()?, env_seed)?;
    let sets = cli.set_pairs()?;
    if command == Command::Sweep {
        let nested = spec.params.entry("params").or_insert_with(|| Value::Object(Map::new()));
        let Value::Object(nested) = nested else {
            return Err(CliError::Config("sweep `params` must be an object".into()));
        };
        nested.extend(sets);
    } else {
        spec.params.extend(sets);
    }
    Ok(spec)
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with<I, T>(args: I, env_seed: Option<&str>) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match parse_run(&cli, env_seed).and_then(|spec| report::run_and_write(&spec)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
