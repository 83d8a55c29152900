use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OtsmError {
    #[error("invalid block dimensions: {0}")]
    InvalidDims(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("block {block} is not orthonormal (‖OᵀO − I‖_F = {residual:.3e}, tolerance {tolerance:.1e})")]
    NotOrthonormal {
        block: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The objective decreased during a finite-α solve. This signals a bug,
    /// never a property of the data.
    #[error("objective decreased at cycle {cycle}: {previous} -> {current}")]
    MonotonicityViolation {
        cycle: usize,
        previous: f64,
        current: f64,
    },

    #[error(
        "descent inequality violated at cycle {cycle}: step²/(2α) = {lhs:.6e} > gain {rhs:.6e}"
    )]
    DescentViolation { cycle: usize, lhs: f64, rhs: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("I/O error at {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = OtsmError> = std::result::Result<T, E>;

pub(crate) fn mismatch(
    context: impl Into<String>,
    expected: impl ToString,
    found: impl ToString,
) -> OtsmError {
    OtsmError::DimensionMismatch {
        context: context.into(),
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
