//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is outside its documented domain.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A buffer or matrix does not have the shape an operation requires.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A physical quantity falls outside the window the operation supports,
    /// e.g. an echo delay beyond the observation length.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A requested solution does not exist for the given parameters.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Wrapper for file I/O during map dumps and experiment output.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn out_of_range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }
}
