use otsm::OtsmError;
use thiserror::Error;

/// Failure of a command, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid input: exit 1.
    #[error("{0}")]
    Input(String),
    /// Numerical or internal failure: exit 5.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 5,
        }
    }
}

impl From<OtsmError> for CliError {
    fn from(e: OtsmError) -> Self {
        match e {
            OtsmError::InvalidDims(_)
            | OtsmError::DimensionMismatch { .. }
            | OtsmError::NotOrthonormal { .. }
            | OtsmError::InvalidConfig(_)
            | OtsmError::InvalidInput(_)
            | OtsmError::Io { .. } => CliError::Input(e.to_string()),
            OtsmError::Numerical(_)
            | OtsmError::MonotonicityViolation { .. }
            | OtsmError::DescentViolation { .. }
            | OtsmError::Internal(_) => CliError::Internal(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
