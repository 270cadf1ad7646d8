use std::path::PathBuf;

use crate::ids::{ItemId, UserId};

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("preference pair needs two distinct items, got ({0}, {0})")]
    SameItemPair(ItemId),

    #[error("graph build failed: {0}")]
    Build(String),

    #[error("no user survives the split threshold of {required} ratings")]
    EmptyDataset { required: usize },

    #[error("user {0} has no training observations (cold start)")]
    ColdStart(UserId),

    #[error("dense oracle failed: {0}")]
    Oracle(String),

    #[error("malformed graph snapshot: {0}")]
    Snapshot(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
