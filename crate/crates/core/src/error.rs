//! Crate-wide error type.
//!
//! Every fallible operation returns [`Error`]. Variants form a small, stable
//! taxonomy so callers (including the CLI and the C ABI) can map failures to
//! exit codes / status codes without string matching. The `class` of an error
//! is the lowercase variant name and is part of the public contract: the CLI
//! prints it and tests assert on it.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes for the whole toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A function argument is out of its documented range (bad fraction,
    /// non-positive hyperparameter, empty input, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// Input data does not match the expected schema (wrong CSV header,
    /// missing band plane, mismatched band names, ...).
    #[error("schema error: {0}")]
    Schema(String),

    /// Shapes or georeferencing of two objects disagree.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A value is outside the mathematical domain of the operation
    /// (non-positive band ratio, zero-variance truth, degenerate bandwidth).
    #[error("domain error: {0}")]
    Domain(String),

    /// A byte stream is not a valid instance of one of the file formats.
    #[error("format error: {0}")]
    Format(String),

    /// A file's declared and actual sizes disagree (truncation / trailing bytes).
    #[error("length error: {0}")]
    Length(String),

    /// A numeric or structural field failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// A file declares a format version this build does not support.
    #[error("version error: {0}")]
    Version(String),

    /// A linear system is numerically singular (collinear features).
    #[error("rank error: {0}")]
    Rank(String),

    /// The operation is invalid for the object's current state
    /// (e.g. out-of-bag evaluation of a model fitted without bootstrap).
    #[error("state error: {0}")]
    State(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Prefix the message with a context label (e.g. the model a fit error
    /// came from), preserving the error class. I/O errors pass through
    /// unchanged.
    pub fn with_context(self, context: &str) -> Error {
        let tag = |msg: String| format!("{context}: {msg}");
        match self {
            Error::Argument(m) => Error::Argument(tag(m)),
            Error::Schema(m) => Error::Schema(tag(m)),
            Error::Dimension(m) => Error::Dimension(tag(m)),
            Error::Domain(m) => Error::Domain(tag(m)),
            Error::Format(m) => Error::Format(tag(m)),
            Error::Length(m) => Error::Length(tag(m)),
            Error::Parse(m) => Error::Parse(tag(m)),
            Error::Version(m) => Error::Version(tag(m)),
            Error::Rank(m) => Error::Rank(tag(m)),
            Error::State(m) => Error::State(tag(m)),
            Error::Io(e) => Error::Io(e),
        }
    }

    /// Stable lowercase class name of this error.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Argument(_) => "argument",
            Error::Schema(_) => "schema",
            Error::Dimension(_) => "dimension",
            Error::Domain(_) => "domain",
            Error::Format(_) => "format",
            Error::Length(_) => "length",
            Error::Parse(_) => "parse",
            Error::Version(_) => "version",
            Error::Rank(_) => "rank",
            Error::State(_) => "state",
            Error::Io(_) => "io",
        }
    }
}
