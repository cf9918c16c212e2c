use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] belltensor::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Parameter(String),
}

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    CheckFailure = 1,
    Parameter = 2,
    Capacity = 3,
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Core(belltensor::Error::Parameter(_)) | CliError::Parameter(_) => ExitCode::Parameter,
            CliError::Core(belltensor::Error::Capacity(_)) => ExitCode::Capacity,
            _ => ExitCode::CheckFailure,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
