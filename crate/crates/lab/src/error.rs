//! Error type carrying the CLI exit-code contract:
//! 0 success, 2 validation, 3 numerical abort, 4 verification failure.

use std::path::PathBuf;

use csmlab_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical abort: {0}")]
    Numerical(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) | LabError::Io { .. } => 2,
            LabError::Numerical(_) => 3,
            LabError::VerificationFailed(_) => 4,
        }
    }
}

impl From<CoreError> for LabError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonFinite { .. } => LabError::Numerical(e.to_string()),
            _ => LabError::Validation(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
