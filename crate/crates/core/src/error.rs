use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    /// The request is well-formed but too large to honor (exhaustive search).
    #[error("refused: {0}")]
    Refused(String),
    #[error("incompatible codebook: {0}")]
    IncompatibleCodebook(String),
}

pub type Result<T> = std::result::Result<T, Error>;
