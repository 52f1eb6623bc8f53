use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or unsatisfiable configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A required artifact or state is missing.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A loss or parameter became NaN or infinite.
    #[error("numerical divergence: {0}")]
    Divergence(String),

    /// Input that makes the requested quantity undefined (e.g. zero norm).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Precondition(_) | Error::Checkpoint(_) => 3,
            Error::Divergence(_) => 4,
            _ => 1,
        }
    }
}
