//! Experiment runner for spatially coupled codes: configuration, seeded
//! Monte Carlo orchestration and CSV/JSON result files.

pub mod codes;
pub mod commands;
pub mod config;
pub mod sim;

use thiserror::Error;

pub use commands::run_experiment;
pub use config::{Command, ExperimentConfig, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Runtime(_) => 3,
        }
    }
}
