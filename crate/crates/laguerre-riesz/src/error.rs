use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid type parameter: {0}")]
    InvalidAlpha(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature construction failed: {0}")]
    QuadratureFailure(String),

    #[error("integration produced a non-finite value: {0}")]
    IntegrationFailure(String),

    #[error("composition count {count} exceeds cap {cap}")]
    CompositionCap { count: usize, cap: usize },

    #[error("grid under-resolved: {0}")]
    UnderResolvedGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
