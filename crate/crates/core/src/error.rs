use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two inputs disagree on alphabet size or dimension.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// An input violates a precondition (negative weight, non-probability, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A randomized or combinatorial construction could not be completed.
    #[error("construction failed: {0}")]
    Construction(String),
    /// A brute-force budget was exceeded.
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
