use thiserror::Error;

/// Errors raised by the factorization library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix data length {len} does not match {rows}x{cols}")]
    DataLength {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nonnegative input required: entry ({row}, {col}) = {value}")]
    NegativeInput { row: usize, col: usize, value: f64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
