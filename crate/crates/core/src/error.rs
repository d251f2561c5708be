use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the witness, estimator, simulator and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("`{name}` = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty run: R0 = 0")]
    EmptyRun,

    #[error("no clicks: {0}")]
    NoClicks(&'static str),

    #[error("singular splitting ratio t = {0}")]
    SingularSplitting(f64),

    #[error("photon statistics not normalized: total mass {0}")]
    NotNormalized(f64),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("mean photon number is zero")]
    ZeroMean,

    #[error("truncation overflow: tail mass {tail:e} beyond n_max = {n_max}")]
    TruncationOverflow { tail: f64, n_max: usize },

    #[error("row {row}, column `{column}`: {reason}")]
    Parse { row: usize, column: String, reason: String },

    #[error("row {row} ({label}): {reason}")]
    InvariantViolation { row: usize, label: String, reason: String },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("{label}: {source}")]
    Labeled {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::Labeled { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
