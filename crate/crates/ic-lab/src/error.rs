use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum IcError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, IcError>;
