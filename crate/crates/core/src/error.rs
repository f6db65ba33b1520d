use thiserror::Error;

pub type Result<T, E = MeshError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("STL parse error at byte {offset}: {message}")]
    StlParse { offset: usize, message: String },

    #[error("OBJ parse error at line {line}: {message}")]
    ObjParse { line: usize, message: String },

    #[error("mesh has no faces")]
    Empty,

    #[error("face {face} references vertex {index} but mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },

    #[error("face {face} repeats vertex index {index}")]
    RepeatedIndex { face: usize, index: usize },

    #[error("non-finite coordinate at vertex {0}")]
    NonFinite(usize),

    #[error("label count {labels} does not match face count {faces}")]
    LabelCount { labels: usize, faces: usize },

    #[error("non-manifold edge ({0}, {1}) has more than two incident faces")]
    NonManifoldEdge(usize, usize),

    #[error("edge ({0}, {1}) is used twice in the same direction (inconsistent orientation)")]
    InconsistentOrientation(usize, usize),

    #[error("mesh is not a watertight manifold: {0}")]
    NotWatertight(String),

    #[error("degenerate triangle")]
    DegenerateTriangle,

    #[error("rotation is not orthonormal with determinant +1 (deviation {0:.3e})")]
    NotARotation(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cap triangulation failed: {0}")]
    CapTriangulation(String),

    #[error("mesh is empty after clean-up")]
    EmptyAfterCleanup,

    #[error("no face within marker radius of the {0} ear marker")]
    MarkerMisplaced(&'static str),

    #[error("correspondence fallback fraction {fraction:.3} exceeds 0.5; alignment presumed broken")]
    CorrespondenceFallback { fraction: f64 },

    #[error("correspondence entry {entry} references face {face} but target has {face_count} faces")]
    CorrespondenceFace {
        entry: usize,
        face: usize,
        face_count: usize,
    },

    #[error("correspondence map was built against target {expected}, got {found}")]
    TargetMismatch { expected: String, found: String },
}
