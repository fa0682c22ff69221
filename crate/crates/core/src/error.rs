//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SphError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("infeasible or empty body: {0}")]
    Infeasible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SphError>;
