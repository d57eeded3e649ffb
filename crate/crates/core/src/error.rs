use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical quantity outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No local refinement in the multi-start grid reached a tolerance criterion.
    #[error("fit did not converge: {0}")]
    Convergence(String),

    /// The chi-squared profile never crossed the target level inside the search span.
    #[error("profile for {parameter} does not bracket the target level: {reason}")]
    Profile { parameter: &'static str, reason: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: u64, column: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column: column.into(),
            message: message.into(),
        }
    }
}
