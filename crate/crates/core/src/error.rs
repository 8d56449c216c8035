use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("could not bracket zero #{index} of j_(d/2-1) for d = {d}")]
    ZeroBracket { d: usize, index: usize },

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error on {}: {msg}", path.display())]
    Serialization { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code used by the CLI: 2 for bad input, 3 for numerical
    /// failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::Parse { .. }
            | Error::DegenerateDataset(_) => 2,
            Error::NumericalFailure(_) | Error::ZeroBracket { .. } => 3,
            Error::Io { .. } | Error::Serialization { .. } => 4,
        }
    }
}
