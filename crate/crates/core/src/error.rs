use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid ksize {ksize} for a {width}x{height} image")]
    InvalidKsize { ksize: usize, width: usize, height: usize },

    #[error("unsupported color space `{0}`")]
    UnsupportedSpace(String),

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("invalid class distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid split weights: {0}")]
    InvalidWeights(String),

    #[error("target has a single class after thresholding")]
    DegenerateTarget,

    #[error("feature matrix is empty")]
    EmptyMatrix,

    #[error("empty group `{0}`")]
    EmptyGroup(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("could not place component {index} after {attempts} attempts")]
    PlacementFailure { index: usize, attempts: usize },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
