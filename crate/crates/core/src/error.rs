use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Pattern {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid pattern template {template:?}: {message}")]
    Template { template: String, message: String },

    #[error("entity {0:?} appears more than once in the build records")]
    DuplicateEntity(String),

    #[error("document id {0} is out of range")]
    InvalidDocId(u32),

    #[error("invalid index parameters: {0}")]
    InvalidParams(String),

    #[error("index format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt index at {path}: {message}")]
    CorruptIndex { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn corrupt(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::CorruptIndex {
            path: path.into(),
            message: message.into(),
        }
    }
}
