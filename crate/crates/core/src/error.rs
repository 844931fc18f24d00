use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0} (must be at least 1)")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation budget exhausted: {remaining} left, {required} required")]
    BudgetExhausted { remaining: u64, required: u64 },

    #[error("too few points for a rate fit: {got} usable, at least {needed} required")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),

    #[error("trace {iteration} requested but trace has only {available} iterations")]
    TraceTooShort { iteration: usize, available: usize },

    #[error("cannot write output to {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corrupt or missing input {path}: {reason}")]
    CorruptInput { path: PathBuf, reason: String },
}

impl Error {
    /// Process exit code: 1 for bad configuration or parameters, 2 for
    /// unwritable output, 3 for missing or corrupt inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Output { .. } => 2,
            Error::CorruptInput { .. } | Error::TraceTooShort { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Output {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn corrupt(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::CorruptInput {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}
