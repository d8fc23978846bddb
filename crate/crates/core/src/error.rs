use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the sparse kernels, factorizations and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A pivot or triangular diagonal is zero (or below the breakdown threshold).
    #[error("breakdown at row {row}: diagonal value {value:e}")]
    Breakdown { row: usize, value: f64 },

    #[error("zero diagonal entry at row {row}")]
    ZeroDiagonal { row: usize },

    #[error("non-finite value encountered at row {row}")]
    NonFinite { row: usize },

    /// The objective has a pole at gamma = 0.
    #[error("acceleration parameter gamma must be nonzero")]
    GammaPole,

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("unsupported matrix market format: {0}")]
    UnsupportedFormat(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
