use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library and the CLI.
#[derive(Debug, Error)]
pub enum JofcError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("matrix of order {size} exceeds the dense materialization cap of {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("eigensolver failed to converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl JofcError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            JofcError::Singular(_) | JofcError::NoConvergence { .. } | JofcError::NonFinite(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        JofcError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        JofcError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, JofcError>;
