use std::path::PathBuf;

use qfiext_core::Error as CoreError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID_ARGUMENTS: i32 = 1;
    pub const INVARIANT_VIOLATION: i32 = 2;
    pub const VALIDATION_FAILURE: i32 = 3;
    pub const NON_CONVERGENCE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid arguments: {0}")]
    Args(String),

    #[error("InvalidSpec at `{path}`: {reason}")]
    InvalidSpec { path: String, reason: String },

    #[error("{}:{line}:{column}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Model(#[from] CoreError),

    #[error("at {variable} = {value}: {source}")]
    AtPoint {
        variable: String,
        value: f64,
        source: CoreError,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn spec(path: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::InvalidSpec {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn parse(file: impl Into<PathBuf>, err: &serde_json::Error) -> Self {
        CliError::Parse {
            file: file.into(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Args(_) | CliError::InvalidSpec { .. } | CliError::Parse { .. } | CliError::Io { .. } => {
                exit::INVALID_ARGUMENTS
            }
            CliError::Model(e) | CliError::AtPoint { source: e, .. } => core_exit_code(e),
            CliError::Validation(_) => exit::VALIDATION_FAILURE,
        }
    }
}

fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::InvalidParameter { .. } => exit::INVALID_ARGUMENTS,
        CoreError::QuadratureNotConverged { .. } => exit::NON_CONVERGENCE,
        e if e.is_input_violation() => exit::INVARIANT_VIOLATION,
        _ => exit::VALIDATION_FAILURE,
    }
}
