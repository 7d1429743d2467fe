//! Crate-level error type.

use thiserror::Error;

/// Errors produced by the exploration pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation was called outside its contract (dimension mismatch,
    /// invalid configuration value, malformed space, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Chain initialization exhausted its attempt budget without finding a
    /// starting point for which the outcome holds.
    #[error("chain initialization failed: outcome never held in {budget} prior draws")]
    ChainInit { budget: usize },

    /// Kernel density fit failure.
    #[error("kde fit: {0}")]
    KdeFit(String),

    /// Evaluation outside the domain of an operation (e.g. zero prior density).
    #[error("domain error: {0}")]
    Domain(String),

    /// An external simulator process failed: nonzero exit, malformed output
    /// protocol, or timeout. Captured output is attached for diagnosis.
    #[error("external simulator: {message}\n--- stdout ---\n{stdout}\n--- stderr ---\n{stderr}")]
    External {
        message: String,
        stdout: String,
        stderr: String,
    },

    /// A numerical result left its valid range (non-finite surface values...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
