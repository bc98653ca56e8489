//! Config-driven experiment runner for Trotter product convergence studies.

pub mod commands;
pub mod config;
pub mod output;

use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::output::Table;

pub const EXIT_OK: i32 = 0;
/// `check`: the rate condition `β̂ > 2α − 1` fails.
pub const EXIT_CONDITION: i32 = 2;
/// `converge`, `semigroup`, `bounds`: a measured criterion fails.
pub const EXIT_CRITERION: i32 = 3;
pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_GRID: i32 = 65;
pub const EXIT_NUMERIC: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] trotter_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(trotter_core::Error::IndivisibleGrid { .. }) => EXIT_GRID,
            CliError::Core(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Converge,
    Semigroup,
    Bounds,
}

/// Result of one command: the JSON report, the CSV table and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub table: Table,
    pub exit_code: i32,
}

pub fn run(command: Command, config: &ExperimentConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Check => commands::run_check(config),
        Command::Converge => commands::run_converge(config),
        Command::Semigroup => commands::run_semigroup(config),
        Command::Bounds => commands::run_bounds(config),
    }
}

/// Loads the config, runs the command and writes `report.json` and
/// `table.csv` into `out`. Returns the process exit code.
pub fn run_to_dir(command: Command, config_path: &Path, out: &Path) -> Result<Outcome, CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let outcome = run(command, &config)?;
    output::write_outputs(out, &outcome.report, &outcome.table)?;
    Ok(outcome)
}
