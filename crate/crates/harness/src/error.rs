use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] nlact_core::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: impl Into<std::io::Error>) -> Self {
        HarnessError::Io {
            path: path.into(),
            source: source.into(),
        }
    }

    /// Process exit status for the CLI: 1 verification, 2 bad arguments, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(nlact_core::Error::Validation(_)) => 1,
            HarnessError::Core(_) | HarnessError::Config(_) => 2,
            HarnessError::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
