use std::io;

use thiserror::Error;

/// Errors produced by the extraction engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (mismatched keys, shapes, labels).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The operation declined to run on the given input (size guards, empty corpora).
    #[error("refused: {0}")]
    Refused(String),

    /// Malformed input text, with a 1-based line number.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
