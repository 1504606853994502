use thiserror::Error;

use crate::sparse::NoConvergence;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("mesh validation failed: {0}")]
    Validation(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular matrix: pivot {pivot:.3e} at step {step} (threshold {threshold:.3e})")]
    SingularMatrix { step: usize, pivot: f64, threshold: f64 },

    #[error("iterative solver did not converge after {} iterations (residual {:.3e})", .0.iterations, .0.final_residual())]
    NoConvergence(Box<NoConvergence>),

    #[error("solve failed at lambda = {lambda}: {reason}")]
    Solver { lambda: f64, reason: String },

    #[error("sector violation: Re = {re:.3e} below -{tol:.3e}")]
    SectorViolation { re: f64, tol: f64, witness: Vec<crate::C64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
