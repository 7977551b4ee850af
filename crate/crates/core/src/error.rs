use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("flat segment: zero variance")]
    FlatSegment,

    #[error("no valid beats: {0}")]
    NoValidBeats(String),

    #[error("invalid HRV segment: {0}")]
    InvalidHrvSegment(String),

    #[error("manifest {path}: {msg}")]
    Manifest { path: PathBuf, msg: String },

    #[error("{path}: bad magic {found:?}, expected {expected:?}")]
    BadMagic {
        path: PathBuf,
        found: [u8; 4],
        expected: [u8; 4],
    },

    #[error("{path}: unsupported version {version}")]
    BadVersion { path: PathBuf, version: u32 },

    #[error("{path}: truncated payload (header declares {expected} bytes, found {found})")]
    Truncated {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("predictions {path}: {msg}")]
    Predictions { path: PathBuf, msg: String },

    #[error("degenerate leverage at row {row} (h_ii = {leverage}) for alpha {alpha}")]
    DegenerateLeverage { row: usize, leverage: f64, alpha: f64 },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("subject leakage: {0} appears in both train and test of fold {1}")]
    Leakage(String, usize),

    #[error("subject {0}: no valid segments after feature extraction")]
    NoValidSegments(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
