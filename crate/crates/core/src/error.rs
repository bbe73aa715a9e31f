use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its valid domain. `field` names the offending
    /// input the way it appears in configuration files.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// A modelling assumption required by a bound does not hold.
    #[error("model assumption violated: {0}")]
    AssumptionViolation(String),

    /// Bob sits in an exact null of the cascade channel; MRT is undefined.
    #[error("degenerate cascade channel: |h_B^H Theta G| = {norm:e}")]
    DegenerateCascade { norm: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
