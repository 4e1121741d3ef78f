use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid `(σ, k, n)` combination.
    #[error("invalid kernel spec: {0}")]
    InvalidSpec(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid initial data: {0}")]
    InvalidData(String),
    /// Configuration file or command-line problem; the message names the key.
    #[error("config error: {0}")]
    Config(String),
    /// The flow carried the momentum support too close to the truncation radius.
    #[error("truncation guard tripped: {0}")]
    Guard(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
