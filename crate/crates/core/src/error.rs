use thiserror::Error;

/// Errors raised by channel construction, the criteria engine and the
/// factorization driver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("vector of length {len} cannot be reshaped to {rows}x{cols}")]
    LengthMismatch { len: usize, rows: usize, cols: usize },

    #[error("map is not completely positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("map is not trace preserving (defect {defect:.3e})")]
    NotTracePreserving { defect: f64 },

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("elementary channel with lambda = {lambda} is not invertible")]
    NotInvertible { lambda: f64 },

    #[error("lambda = {lambda} is infeasible: residual Choi matrix has min eigenvalue {min_eigenvalue:.3e}")]
    Infeasible { lambda: f64, min_eigenvalue: f64 },

    #[error("no block of admissible size is positive definite")]
    NoQualifyingBlock,

    #[error("invalid stochastic matrix: {0}")]
    InvalidStochastic(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(expected: impl ToString, got: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
