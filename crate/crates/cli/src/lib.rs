//! Command-line driver for `sampled-sde`: a rayon path executor, layered run
//! configuration, CSV/TSV export and the four subcommands.
//!
//! Exit codes: 0 success, 2 configuration, 3 divergence, 4 statistics
//! precondition. Every failure maps onto one of these.

pub mod commands;
pub mod config;
pub mod exec;
pub mod output;

use std::path::PathBuf;

use sampled_sde::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sampled_sde::Error),

    #[error("invalid {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Divergence => 3,
                ErrorKind::Statistics => 4,
            },
            // Unwritable or unreadable paths are a configuration problem.
            CliError::Config { .. } | CliError::Io { .. } | CliError::Csv { .. } => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
