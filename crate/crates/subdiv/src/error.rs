use hrtf_core::MeshError;
use thiserror::Error;

pub type Result<T, E = SubdivError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SubdivError {
    #[error(transparent)]
    Mesh(#[from] MeshError),

    #[error("network dimensions do not match: {0}")]
    DimensionMismatch(String),

    #[error("input mesh must be a watertight genus-0 manifold: {0}")]
    Topology(String),

    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(&'static str),

    #[error("non-finite loss at epoch {epoch}, pair {pair}")]
    NonFiniteLoss { epoch: usize, pair: usize },

    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),

    #[error("no training pairs")]
    NoPairs,

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
