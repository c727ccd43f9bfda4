use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// The variants are grouped so that callers (the CLI in particular) can tell
/// configuration problems apart from data and runtime failures.
#[derive(Debug, Error)]
pub enum Error {
    /// An invalid argument passed to an operation (bad fraction, k < 1, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The experiment configuration or manifest violates a schema or invariant.
    #[error("config error: {0}")]
    Config(String),

    /// A dataset could not be loaded or failed validation.
    #[error("load error in {path}: {message}")]
    Load { path: String, message: String },

    /// Runtime data problem (degenerate training set, undefined AUC, ...).
    #[error("{0}")]
    Data(String),

    /// A model file is malformed or was written by an incompatible version.
    #[error("model error: {0}")]
    Model(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn load(path: impl std::fmt::Display, message: impl Into<String>) -> Self {
        Error::Load {
            path: path.to_string(),
            message: message.into(),
        }
    }

    /// True for errors that stem from the user's configuration rather than
    /// from data or the environment.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Argument(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
