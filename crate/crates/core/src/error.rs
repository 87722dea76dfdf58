use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Two neuron tiles with no legal one-turn route between them
    /// (only possible on single-row or single-column grids).
    #[error("no one-turn route from tile {src} to tile {dst}")]
    Unroutable { src: String, dst: String },

    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing files: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingFiles(Vec<PathBuf>),

    #[error("numerical error at epoch {epoch}, step {step}: {msg}")]
    Numerical { epoch: usize, step: usize, msg: String },

    #[cfg(feature = "shd")]
    #[error("HDF5 error on {path}: {source}")]
    Hdf5 {
        path: PathBuf,
        #[source]
        source: hdf5::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format { path: path.into(), msg: msg.into() }
    }
}
