//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// The variants are grouped so a caller can map them onto coarse exit
/// codes: parse/validation problems, I/O problems, numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text. `line` is 1-based, `col` is a 1-based byte
    /// offset into the offending line (0 when unknown).
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// A precondition or invariant was violated.
    #[error("{0}")]
    Validation(String),

    /// A vector or dataset was used with a model of a different width.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    /// A NaN or infinity showed up where finite arithmetic was required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    /// Rewrites the line number of a parse error; used by file readers
    /// that parse line by line.
    pub fn at_line(self, line: usize) -> Self {
        match self {
            Error::Parse { col, msg, .. } => Error::Parse { line, col, msg },
            other => other,
        }
    }

    /// Prefixes a source description (usually a file name) onto the
    /// message, keeping the variant and therefore the exit-code class.
    pub fn in_context(self, what: &str) -> Self {
        match self {
            Error::Parse { line, col, msg } => Error::Parse {
                line,
                col,
                msg: format!("{what}: {msg}"),
            },
            Error::Validation(msg) => Error::Validation(format!("{what}: {msg}")),
            Error::NonFinite(msg) => Error::NonFinite(format!("{what}: {msg}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
