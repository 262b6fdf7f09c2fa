use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("instance too large for exhaustive search: {size} exceeds limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("simplex breakdown after {iterations} pivots (basis {basis:?}): {reason}")]
    Solver {
        iterations: usize,
        basis: Vec<usize>,
        reason: String,
    },

    #[error("non-finite value in {layer}")]
    Numeric { layer: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("method `{0}` requires a trained model")]
    MissingModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
