use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("row count mismatch: matrix has {matrix} rows, metadata has {metadata}")]
    RowCountMismatch { matrix: usize, metadata: usize },

    #[error("dimension mismatch at row {row}: expected {expected}, found {found}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("zero-norm feature at row {row}")]
    ZeroNorm { row: usize },

    #[error("duplicate item_id {item_id:?} at row {row}")]
    DuplicateItemId { row: usize, item_id: String },

    #[error("malformed metadata at row {row}: {reason}")]
    Metadata { row: usize, reason: String },

    #[error("weights schema error: {0}")]
    Schema(String),

    #[error("index {index} out of range for set of {len}")]
    InvalidIndex { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient identity structure: {0}")]
    IdentityStructure(String),

    #[error("misaligned input: expected {expected} refined features, found {found}")]
    Misaligned { expected: usize, found: usize },

    #[error("dimension mismatch between sets: {left} vs {right}")]
    IncompatibleDims { left: usize, right: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
