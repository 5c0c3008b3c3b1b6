use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("{what}: {n} variables exceeds the exhaustive-search cap of {cap}")]
    SizeCap { what: &'static str, n: usize, cap: usize },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error(
        "edge set too sparse: {clauses} clauses sampled without isolating the planted solution"
    )]
    SparseGraph { clauses: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
