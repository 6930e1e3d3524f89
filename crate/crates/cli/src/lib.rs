//! Command-line driver: dataset validation, walk-forward runs, and report/plot-data export.

pub mod artifacts;
pub mod config;
pub mod report;
pub mod run;
pub mod validate;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: config, dataset, or a missing artifact.
    #[error("{0}")]
    Invalid(String),
    #[error("engine error: {0}")]
    Engine(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for an engine failure, 2 for invalid input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Engine(_) => 1,
            CliError::Invalid(_) | CliError::Io { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
