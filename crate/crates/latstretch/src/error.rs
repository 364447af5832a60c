use std::path::PathBuf;

use latstretch_core::Error;

/// Everything that can end a run, with its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("malformed body ({source_name}): {message}")]
    Body { source_name: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    /// 1 for precondition failures, guards and failed checks; 2 for bad
    /// usage and malformed input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Body { .. } | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                Error::InvalidInput(_) | Error::InvalidBody(_) | Error::NotImplemented(_) => 2,
                _ => 1,
            },
            CliError::CheckFailed(_) => 1,
        }
    }
}
