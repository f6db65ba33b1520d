//! Boundary-element synthesis of head-related transfer functions.
//!
//! Constant triangular elements collocated at centroids, a direct boundary
//! integral formulation of the exterior Neumann problem made unique with
//! interior CHIEF points, and dense least squares. HRTFs are obtained by
//! reciprocity: each ear is a vibrating patch and the radiated pressure is
//! sampled on a spherical grid and normalized by a free-field point source.
//!
//! Internally pressures carry the time factor `e^{-iωt}`; stored transfer
//! values use `e^{+iωt}`, so a delay `τ` appears as `e^{-iωτ}`.

pub mod analytic;
pub mod assemble;
pub mod chief;
pub mod config;
pub mod error;
pub mod field;
pub mod green;
pub mod hrir;
pub mod hrtf;
pub mod quadrature;
pub mod solve;
pub mod synth;

pub use analytic::{analytic_sphere_response, required_terms, SeriesResponse, SphereSource};
pub use assemble::{assemble, assemble_sources, elements, BemSystem};
pub use chief::chief_points;
pub use config::{default_frequencies, AcousticConfig, EvalGrid, GridDirection, Medium};
pub use error::{BemError, Result};
pub use field::{evaluate_field, SurfaceData};
pub use green::{green, green_normal_derivative};
pub use hrir::hrtf_to_hrir;
pub use hrtf::{from_hrtf_json, load_hrtf_json, save_hrtf_json, to_hrtf_json, Ear, Encoding, GridPoint, HrtfSet, ImpulseResponses};
pub use num_complex::Complex64;
pub use solve::{solve, solve_least_squares, LeastSquares, SurfaceSolution};
pub use synth::{
    equivalent_cap_source, free_field_reference, label_patches, max_edge_for, sphere_oracle, synthesize_hrtf, transfer_value,
    FrequencyFailure, Synthesis, DEFAULT_EXTRA_TERMS,
};
