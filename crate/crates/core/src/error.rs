use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("argument outside the convergence disk: |z| = {z} >= 1/27")]
    OutOfDisk { z: f64 },
    #[error("pole: {0}")]
    Pole(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    /// True for errors caused by the caller's input rather than by a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Invalid(_) | Error::Parse { .. } | Error::Unsupported(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
