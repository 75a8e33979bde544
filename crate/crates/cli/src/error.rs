use elliptic_core::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ValidationError: {0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(Error),
    #[error("IoError: {0}")]
    Io(String),
    /// A verification report with failing checks.
    #[error("{0} verification check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::ChecksFailed(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => CliError::Io(m),
            Error::InvalidCurve(_)
            | Error::OffCurve { .. }
            | Error::InvalidRange(_)
            | Error::DegreeMismatch(_)
            | Error::FactorMissing(_)
            | Error::MissingField(_)
            | Error::WindowTooSmall { .. } => CliError::Validation(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
