use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the detectors, the benchmark harness and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates the documented precondition of an operation.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// The image is too small or two images disagree in size.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A Netpbm header or ASCII sample could not be parsed.
    #[error("format error at token {token:?}: {reason}")]
    Format { token: String, reason: String },

    /// The pixel payload ended early.
    #[error("truncated pixel data: expected {expected} {unit}, found {actual}")]
    Truncated {
        expected: usize,
        actual: usize,
        unit: &'static str,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn format(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            token: token.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad arguments rather than by the filesystem or file contents.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Param(_) | Error::Dimension(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
