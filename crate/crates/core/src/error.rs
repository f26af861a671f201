use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// An eigenvalue is not strictly negative, so the steady-state
    /// covariance integral diverges.
    #[error("spectrum is not strictly stable: eigenvalue {value} at position {index}")]
    UnstableEigenvalue { index: usize, value: f64 },

    #[error("{what} exceeds supported size: {got} > {max}")]
    SizeLimit {
        what: &'static str,
        got: usize,
        max: usize,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    ConvergenceFailure {
        what: &'static str,
        iterations: usize,
    },

    #[error("matrix is not positive semidefinite ({context})")]
    NotPositiveSemidefinite { context: &'static str },

    #[error("operation {operation} is not supported for {geometry} geometry")]
    UnsupportedGeometry {
        operation: &'static str,
        geometry: &'static str,
    },

    /// The solver produced a result that violates its own accuracy contract.
    #[error("solver contract violated: {what} = {value:e} exceeds {limit:e}")]
    ContractViolation {
        what: &'static str,
        value: f64,
        limit: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
