use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Wav { path: PathBuf, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{0}")]
    Validation(String),
    #[error("degenerate statistics: {0}")]
    Degenerate(String),
    #[error("rank-deficient design: column(s) {columns:?} are collinear")]
    RankDeficient { columns: Vec<String> },
    #[error("{0}")]
    Serialize(String),
}

/// Process exit code class for an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Validation = 1,
    Io = 2,
    Degenerate = 3,
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::Io { .. } | Error::Wav { .. } | Error::Serialize(_) => ExitClass::Io,
            Error::Invalid(_) | Error::Validation(_) => ExitClass::Validation,
            Error::Degenerate(_) | Error::RankDeficient { .. } => ExitClass::Degenerate,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Error::Serialize(e.to_string())
        } else {
            Error::Validation(format!("malformed CSV: {e}"))
        }
    }
}
