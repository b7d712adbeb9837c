use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An exhaustive search would exceed its configured size limit.
    #[error("{what}: {actual} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        cap: usize,
        actual: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("instance failed validation:\n{0}")]
    Invalid(ValidationReport),

    #[error("invalid profile: {0}")]
    Profile(String),

    /// An internal consistency check failed; indicates a bug rather than bad input.
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
