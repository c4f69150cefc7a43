use std::path::PathBuf;

use ris_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 invalid input, 3 refusal, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(CoreError::Refused(_)) => 3,
            HarnessError::Core(_) | HarnessError::Invalid(_) => 2,
            HarnessError::Io { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
