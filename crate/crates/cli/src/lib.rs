//! Experiment harness over `boxnorm-core`: JSON configs, scenario runners
//! and deterministic CSV reports.

pub mod config;
pub mod fixtures;
pub mod report;
pub mod scenarios;

pub use config::{ExperimentConfig, Scenario};
pub use report::ExperimentReport;
pub use scenarios::{run, RunOptions};

use boxnorm_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cap exceeded: {0}")]
    Cap(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("{0}")]
    Core(Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::CapExceeded { .. } => CliError::Cap(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    /// 1 for assertion failures, 2 for bad input, 3 for exceeded caps.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Cap(_) => 3,
            CliError::Config(_) | CliError::Core(_) | CliError::Io(_) => 2,
        }
    }
}
