use hrtf_core::{MeshError, Region};
use thiserror::Error;

pub type Result<T, E = BemError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BemError {
    #[error(transparent)]
    Mesh(#[from] MeshError),

    #[error("invalid acoustic configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid evaluation grid: {0}")]
    InvalidGrid(String),

    #[error("kernel evaluated at a singular point (r = {0:e} m)")]
    SingularPoint(f64),

    #[error("mesh is not a closed, consistently oriented surface: {0}")]
    Topology(String),

    #[error("degenerate element {0}")]
    DegenerateElement(usize),

    #[error("no faces labeled {0}")]
    NoSourceFaces(Region),

    #[error("could not place CHIEF point {index} after {attempts} draws")]
    ChiefPlacement { index: usize, attempts: usize },

    #[error("system is rank deficient (min/max |R_kk| = {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("least-squares residual too large (relative {0:e})")]
    Residual(f64),

    #[error("evaluation point {index} lies inside the body")]
    PointInside { index: usize },

    #[error("series needs at least {required} terms, got {terms}")]
    TooFewTerms { terms: usize, required: usize },

    #[error("series not converged with {terms} terms: tail bound {tail_bound:e} vs value {value:e}")]
    SeriesNotConverged { terms: usize, tail_bound: f64, value: f64 },

    #[error("frequency grid is not uniform: {0}")]
    NonUniformGrid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("HRTF-JSON: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
