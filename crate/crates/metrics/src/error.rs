use hrtf_bem::BemError;
use thiserror::Error;

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Bem(#[from] BemError),

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error("set has no impulse responses")]
    MissingImpulse,

    #[error("set lacks the {0} ear")]
    MissingEar(&'static str),

    #[error("no energy in band for direction {direction}")]
    ZeroEnergy { direction: usize },

    #[error("frequency ranges do not overlap")]
    NoOverlap,

    #[error("no directions matched within {tolerance_deg}°")]
    NoMatchedDirections { tolerance_deg: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("nothing to {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
