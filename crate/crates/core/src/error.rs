use std::path::PathBuf;

use thiserror::Error;

use crate::series::MonthIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error at {date}: {reason}")]
    Domain { date: MonthIndex, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("series too short: need at least {needed} observations, got {got}")]
    Length { needed: usize, got: usize },

    #[error("series ranges do not overlap: {0}")]
    Alignment(String),

    #[error("singular regression: column(s) {columns:?} linearly dependent")]
    Singular { columns: Vec<usize> },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("missing month {missing} (after {previous})")]
    Gap { previous: MonthIndex, missing: MonthIndex },

    #[error("duplicate date {0}")]
    Duplicate(MonthIndex),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("HTTP transport error (status {status}): {message}")]
    Transport { status: u16, message: String },

    #[error("FRED rejected the request: {0}")]
    Authentication(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
