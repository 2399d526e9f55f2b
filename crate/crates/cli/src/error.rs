use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command line, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("config: {0}")]
    Invalid(String),
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("numerical failure: {0}")]
    Numerical(#[from] biokz::Error),
    #[error("self-check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(line: usize, message: impl Into<String>) -> Self {
        CliError::Config {
            line,
            message: message.into(),
        }
    }

    pub fn schema(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 2 for configuration problems, 3 for malformed input files, 4 for
    /// numerical failures of single-run commands, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Invalid(_) => 2,
            CliError::Schema { .. } => 3,
            CliError::Numerical(_) | CliError::Check(_) => 4,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
