use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Parse or validation failure at a config path like `experiment.stability.n`.
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },

    #[error(transparent)]
    Core(#[from] quadlab_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("unknown preset `{0}`; see `quadlab list`")]
    UnknownPreset(String),

    #[error("{0} has no rows with norm, deviation and bound")]
    NoPlotRows(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
