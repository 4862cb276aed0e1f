use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("row {0} has zero norm; cosine distance is undefined")]
    ZeroNormRow(usize),

    #[error("clusters {0} and {1} have coincident centroids")]
    CoincidentCentroids(usize, usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than a failure during
    /// computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Parse { .. } | Error::Format { .. } | Error::Empty(_) | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
