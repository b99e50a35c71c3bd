use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HullError {
    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("word length unknown beyond search radius {radius}")]
    RadiusExceeded { radius: u32 },

    #[error("configuration is only generated up to radius {available}; extend prefix to radius {needed}")]
    ExtendPrefix { needed: u64, available: u64 },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("directions undefined for this group")]
    DirectionsUndefined,

    #[error("eigensolver did not converge within {budget} iterations")]
    NoConvergence { budget: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for HullError {
    fn from(e: std::io::Error) -> Self {
        HullError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HullError>;
