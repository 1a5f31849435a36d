use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the clustering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("input is empty")]
    Empty,
    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {col}: cannot parse {cell:?} as a number")]
    NonNumeric {
        row: usize,
        col: usize,
        cell: String,
    },
    #[error("row {row}, column {col}: value is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("row {row}: label {cell:?} is not an integer")]
    BadLabel { row: usize, cell: String },
    #[error("non-square matrix: {rows} rows but row {row} has {cols} columns")]
    NonSquare {
        rows: usize,
        row: usize,
        cols: usize,
    },
    #[error("row {row}, column {col}: negative dissimilarity {value}")]
    Negative { row: usize, col: usize, value: f64 },
    #[error("entries ({i}, {j}) and ({j}, {i}) differ: {a} vs {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("points need at least one coordinate column")]
    NoCoordinates,
    #[error("k must be ≥ 1")]
    KTooSmall,
    #[error("k = {k} exceeds the number of objects n = {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("k_max must lie in 2..={n}, got {k_max}")]
    KMaxOutOfRange { k_max: usize, n: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {min} objects, got {n}")]
    TooFewObjects { min: usize, n: usize },
    #[error("oracle guard exceeded: C({n}, {k}) > {limit}")]
    GuardExceeded { n: usize, k: usize, limit: u64 },
    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),
    #[error("every object is noise; nothing to merge into")]
    AllNoise,
    #[error("decision trace needs at least 2 values, got {0}")]
    TraceTooShort(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
