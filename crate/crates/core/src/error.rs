use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the feature-extraction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed header: {message}")]
    Header { path: PathBuf, message: String },

    #[error("{0}")]
    Format(String),

    #[error("unknown dtype `{0}`")]
    UnknownDtype(String),

    #[error("size mismatch: header declares {expected} samples, payload holds {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("NaN at sample {index}")]
    NaN { index: usize },

    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimMismatch([usize; 3], [usize; 3]),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown stat `{0}`")]
    UnknownStat(String),

    #[error("mask selects no voxels")]
    EmptyMask,

    #[error("invalid filtered complex: {0}")]
    InvalidComplex(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("classifier: {0}")]
    Classifier(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numeric kernels (triangulation, PCA,
    /// classifier fitting) as opposed to bad input data.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::Classifier(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
