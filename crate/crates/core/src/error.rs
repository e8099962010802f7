use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid hyperparameters, settings or run configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// A model could not be fitted on the supplied data.
    #[error("fit error: {0}")]
    Fit(String),
    /// A query did not match the fitted model (dimension mismatch and friends).
    #[error("input error: {0}")]
    Input(String),
    /// Malformed or unusable data file contents.
    #[error("data error: {0}")]
    Data(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
