use thiserror::Error;

/// Errors raised by construction, evaluation and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A quadrature construction could not be completed, e.g. because the
    /// Gram matrix of the node set is singular or the solver stagnated.
    #[error("construction failure: {message} (final relative residual {residual:.3e})")]
    ConstructionFailure { message: String, residual: f64 },

    /// An eigenvalue iteration did not settle. `history` holds the sequence
    /// of (lambda_min, lambda_max) estimates.
    #[error("eigenvalue iteration did not converge after {iterations} steps")]
    NonConvergence {
        iterations: usize,
        history: Vec<(f64, f64)>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
