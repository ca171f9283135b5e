use std::path::PathBuf;

use thiserror::Error;

/// Process exit status for a successful command.
pub const EXIT_OK: i32 = 0;
/// Validation or assertion failure.
pub const EXIT_FAILED: i32 = 1;
/// Bad arguments or unusable input paths.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] qqlearn::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } => EXIT_USAGE,
            _ => EXIT_FAILED,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
