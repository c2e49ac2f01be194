use thiserror::Error;

/// Errors produced by dataset validation, encoding and fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no samples for exposure {0}")]
    EmptyExposure(usize),

    #[error("cannot remove a sample from empty statistics")]
    EmptyStats,

    #[error("column '{column}': categorical code {code} out of range (0..{categories})")]
    CategoryOutOfRange {
        column: String,
        code: f64,
        categories: usize,
    },

    #[error("column '{column}': non-finite value")]
    NonFinite { column: String },

    #[error("column '{column}': binary value must be 0 or 1, got {value}")]
    NotBinary { column: String, value: f64 },

    #[error("missing required column '{0}'")]
    MissingColumn(String),

    #[error("row {row}, column '{column}': {message}")]
    Row {
        row: usize,
        column: String,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("score curves were computed on different grids")]
    GridMismatch,

    #[error("missing value for column '{0}'")]
    MissingValue(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
