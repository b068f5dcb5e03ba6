//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent configuration (mismatched sample rates, bad window/hop, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A statistical routine received data it cannot work with.
    #[error("statistics error: {0}")]
    Stats(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn stats(msg: impl Into<String>) -> Self {
        Error::Stats(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
