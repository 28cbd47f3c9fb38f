//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by constructors, geometry checks, fitting and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Two containers that must agree in shape do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Projection geometry cannot represent the requested data.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// No acceptable filter coefficients were found.
    #[error("fit error: {0}")]
    Fit(String),

    /// A reconstruction configuration is internally inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// A file could not be decoded; `offset` is the byte where parsing failed.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            expected: expected.into(),
            found: found.into(),
        }
    }
}
