use std::io;

/// Errors produced anywhere in the extraction and analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("solver error: {message}")]
    Solver { message: String },

    #[error("model error: {0}")]
    Model(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn solver(message: impl Into<String>) -> Self {
        Error::Solver {
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
