//! Learned coarse-to-fine mesh subdivision.
//!
//! Each level splits every face into four like midpoint subdivision, then
//! moves old vertices and places new ones with small MLPs evaluated on
//! half-flaps (the four vertices around a directed edge) expressed in a local
//! frame. Networks, gradients and the Adam optimizer are implemented here
//! without an autodiff library.

pub mod adam;
pub mod config;
pub mod error;
pub mod flap;
pub mod loss;
pub mod mlp;
pub mod model;
pub mod params;
pub mod train;
pub mod upsample;

pub use adam::{adam_step, AdamState};
pub use config::TrainConfig;
pub use error::{Result, SubdivError};
pub use flap::{half_flap_features, half_flaps, HalfFlap};
pub use loss::{assign_faces, loss, loss_with_faces, LossValue};
pub use mlp::Mlp;
pub use model::{backward_pass, forward, midpoint_subdivide, subdivide, ForwardPass};
pub use params::SubdivNetParams;
pub use train::{backward, train, training_log_csv, EpochStats, TrainOutcome, TrainingPair};
pub use upsample::{upsample, Upsampled};
