use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument or configuration value is outside its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data is malformed (foreign characters, shape mismatch, empty set).
    #[error("invalid input: {0}")]
    Input(String),

    /// Rejection sampling ran out of attempts.
    #[error("generation failed for {instance}: {reason}")]
    Generation { instance: String, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line() as usize);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            kind => Error::Parse { line, message: format!("{kind:?}") },
        }
    }
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
