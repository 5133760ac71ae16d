use std::io;
use std::path::PathBuf;

use crate::problem::Domain;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-binary value {value} at position {index} for a boolean problem")]
    NonBinary { index: usize, value: u8 },

    #[error("solution type does not match the {expected:?} domain of the problem")]
    DomainMismatch { expected: Domain },

    #[error("unknown {domain:?} problem id {id}")]
    UnknownProblem { id: u32, domain: Domain },

    #[error("{domain:?} problem id {id} is already registered")]
    DuplicateProblem { id: u32, domain: Domain },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("logger is already attached")]
    LoggerAlreadyAttached,

    #[error("logger is not attached")]
    LoggerNotAttached,

    #[error("record offered before a run was started")]
    RunNotStarted,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error("experiment aborted, partial output in {partial_output}: {source}")]
    Aborted {
        partial_output: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
