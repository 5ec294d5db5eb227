//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// The CLI maps these onto process exit codes: config errors exit 2,
/// model-validity errors exit 3, numerical-precision errors exit 4.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The statistical model is degenerate (e.g. no pixel carries atoms).
    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    /// The requested model is not valid at these parameters
    /// (indefinite covariance, negative total density, ...).
    #[error("model validity: {0}")]
    ModelValidity(String),

    /// A numerical consistency check failed (finite-difference
    /// derivatives disagree between step sizes, ...).
    #[error("numerical precision: {0}")]
    NumericalPrecision(String),

    /// Configuration file or flag problem.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
