use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] ncsc_core::Error),
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input or unusable paths, 1 for failed checks and solver
    /// breakdowns.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } | HarnessError::Csv { .. } => 2,
            HarnessError::Core(e) => match e {
                ncsc_core::Error::InvalidSpec(_)
                | ncsc_core::Error::InvalidConfig(_)
                | ncsc_core::Error::DimensionMismatch { .. }
                | ncsc_core::Error::NeedsComponents => 2,
                _ => 1,
            },
            HarnessError::Verification(_) => 1,
        }
    }
}
