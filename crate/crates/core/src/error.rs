use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid optical configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid camera specification: {0}")]
    InvalidCamera(String),

    #[error("phase scan has {got} phases, at least {min} are required")]
    ScanTooShort { got: usize, min: usize },

    #[error("sinusoid fit needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("sample count mismatch: {phases} phases but {counts} counts")]
    LengthMismatch { phases: usize, counts: usize },

    #[error("cross-section band rows {start}..{end} outside image of height {height}")]
    BandOutOfRange { start: usize, end: usize, height: usize },

    #[error("cross-section band contains no valid pixels")]
    EmptyBand,

    #[error("edge-spread profile has no transition between plateaus")]
    NoTransition,

    #[error("edge-spread profile needs {min} columns on each side of the transition, found {below} and {above}")]
    InsufficientPlateau { below: usize, above: usize, min: usize },

    #[error("invalid width measurement: {0}")]
    InvalidWidth(String),

    #[error("quadrature grid does not cover the integrand: {0}")]
    GridCoverage(String),

    #[error("{path}:{line}: key `{key}`: {message}")]
    ConfigParse {
        path: String,
        line: usize,
        key: String,
        message: String,
    },

    #[error("corrupt stack file at byte offset {offset}: {message}")]
    CorruptStack { offset: u64, message: String },

    #[error("malformed {what} at line {line}: {message}")]
    Malformed {
        what: &'static str,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
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
