//! Command-line front end for `sparse-harmonics` experiments.

pub mod config;
pub mod fixtures;
pub mod run;
pub mod svg;

use std::path::Path;

use sparse_harmonics::harness::HarnessError;
use sparse_harmonics::operators::OperatorError;
use sparse_harmonics::weights::WeightError;
use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentKind};
pub use run::{RunOutput, RunReport, execute};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Failure = 1,
    Config = 2,
    Degenerate = 3,
    Violated = 4,
}

impl ExitCode {
    pub fn worst(self, other: Self) -> Self {
        let rank = |c: Self| match c {
            ExitCode::Ok => 0,
            ExitCode::Degenerate => 1,
            ExitCode::Violated => 2,
            ExitCode::Failure => 3,
            ExitCode::Config => 4,
        };
        if rank(other) > rank(self) { other } else { self }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Configuration and parameter errors exit with 2, anything else with 1.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) | CliError::Fixture(_) => ExitCode::Config,
            CliError::Harness(h) => match h {
                HarnessError::Parameter(_)
                | HarnessError::Operator(OperatorError::Parameter(_) | OperatorError::Arity { .. })
                | HarnessError::Weight(WeightError::Spec(_)) => ExitCode::Config,
                _ => ExitCode::Failure,
            },
            CliError::Io(_) => ExitCode::Failure,
        }
    }
}

/// Loads, runs and writes one configuration into `out`.
pub fn run_config(path: &Path, out: &Path) -> Result<RunOutput, CliError> {
    let cfg = ExperimentConfig::load(path)?;
    let output = execute(&cfg)?;
    output.write(out)?;
    Ok(output)
}

/// Runs every shipped fixture into `out/<name>`; returns the worst exit code.
pub fn run_fixtures(root: &Path, out: &Path) -> Result<ExitCode, CliError> {
    let mut code = ExitCode::Ok;
    for fx in fixtures::list(root)? {
        let res = run_config(&fx.config, &out.join(&fx.name))?;
        code = code.worst(res.exit_code());
    }
    Ok(code)
}
