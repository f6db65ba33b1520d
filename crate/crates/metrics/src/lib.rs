//! Numerical comparison of HRTF sets: log-spectral distortion, interaural
//! time and level differences, grid matching, and CSV/SVG reports.
//!
//! Directions are weighted uniformly throughout.

pub mod compare;
pub mod cues;
pub mod error;
pub mod lsd;
mod nan;
pub mod report;
pub mod resample;

pub use compare::{compare, load_reports, CompareConfig, ComparisonReport, DirectionStats, ReportMetadata};
pub use cues::{cue_table, ild, itd, lowpass_zero_phase, CueTable, ItdEstimate, ItdMethod, DEFAULT_LOWPASS_HZ};
pub use error::{MetricsError, Result};
pub use lsd::{average_lsd, lsd, LsdCurve, DEFAULT_BAND, MIN_MAGNITUDE};
pub use report::{emit_report, lsd_csv, lsd_svg, ReportFiles};
pub use resample::{angular_distance_deg, match_directions, resample_to_common_grid, ResampleSummary, DEFAULT_MATCH_TOLERANCE_DEG};
