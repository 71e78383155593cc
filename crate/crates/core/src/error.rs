//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by loaders, measures, training, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violated a contract (shape mismatch,
    /// out-of-range index, invalid configuration).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A data file could not be parsed; reports the offending line.
    #[error("{path}:{line}: {msg}")]
    Load {
        path: String,
        line: usize,
        msg: String,
    },

    /// A measure could not be evaluated on the given data (for example no
    /// row has both a relevant and an irrelevant label).
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A fixture constructor could not satisfy its postcondition.
    #[error("construction error: {0}")]
    Construction(String),

    /// Training produced a non-finite weight.
    #[error("numeric error at iteration {iteration}: {msg}")]
    Numeric { iteration: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 argument/validation, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Evaluation(_) | Error::Construction(_) => 2,
            Error::Load { .. } | Error::Io(_) | Error::Json(_) => 3,
            Error::Numeric { .. } => 4,
        }
    }
}
