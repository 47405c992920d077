use thiserror::Error;

/// Errors raised by the determinant and gluing computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operator is not invertible: {0}")]
    Kernel(String),

    #[error("ill-conditioned fit basis (condition number {condition:.3e})")]
    Conditioning { condition: f64 },

    #[error("spectral map `{0}` declares no asymptotics")]
    MissingAsymptotics(String),

    #[error("model cannot certify its spectrum: {0}")]
    Uncertified(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("perturbation is not trace class: {0}")]
    NotTraceClass(String),

    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("extrapolation diverged: {0}")]
    Extrapolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
