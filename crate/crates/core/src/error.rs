use thiserror::Error;

/// Errors raised by state, channel and analysis constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    Hermiticity { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    Positivity { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    Trace { trace: f64 },

    #[error("basis is not orthonormal (deviation {deviation:e})")]
    Basis { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    Unitarity { deviation: f64 },

    #[error("invalid probability table: {0}")]
    Probability(String),

    #[error("value {value} outside [{min}, {max}]")]
    Range { value: f64, min: f64, max: f64 },

    #[error("Kraus set is not trace preserving (defect {defect:e})")]
    TracePreservation { defect: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}
