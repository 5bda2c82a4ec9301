use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("basis with {count} states exceeds the dimension ceiling {ceiling}")]
    DimensionCeiling { count: u128, ceiling: usize },

    #[error("cutoff ordering violated: {0}")]
    CutoffOrder(String),

    #[error("operator is not hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("energy scheme mismatch: {0}")]
    SchemeMismatch(String),

    #[error("Gross transformation is not unitary (deviation {deviation:e})")]
    Unitarity { deviation: f64 },

    #[error("quadrature budget exceeded: {0}")]
    QuadratureBudget(String),

    #[error("no positive pairing found up to power {cap}: {context}")]
    NotErgodic { cap: usize, context: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing report file {0}")]
    MissingFile(PathBuf),

    #[error("corrupt report file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
