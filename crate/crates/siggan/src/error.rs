//! Crate-wide error type.
//!
//! Variants map onto the CLI exit codes: config/usage problems exit 2,
//! non-finite numerics exit 3, failed verification checks exit 1.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or layer shape disagreement; names both shapes.
    #[error("shape mismatch in {context}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        context: String,
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    /// Violated precondition (bad argument, empty input, out-of-range value).
    #[error("invalid argument: {0}")]
    Invalid(String),

    /// Configuration file or key problem.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed artifact file (bad magic, version, truncation).
    #[error("format error: {0}")]
    Format(String),

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// A verification check ran and failed.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(context: impl Into<String>, expected: &[usize], got: &[usize]) -> Self {
        Error::ShapeMismatch {
            context: context.into(),
            expected: expected.to_vec(),
            got: got.to_vec(),
        }
    }

    /// Process exit code for the CLI front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Verification(_) => 1,
            Error::NonFinite(_) => 3,
            _ => 2,
        }
    }
}
