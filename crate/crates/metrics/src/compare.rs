//! Full comparison of a test set against a reference.

use hrtf_bem::HrtfSet;
use serde::{Deserialize, Serialize};

use crate::cues::{ild, itd, ItdMethod, DEFAULT_LOWPASS_HZ};
use crate::error::{MetricsError, Result};
use crate::lsd::{lsd, LsdCurve, DEFAULT_BAND};
use crate::resample::{resample_to_common_grid, DEFAULT_MATCH_TOLERANCE_DEG};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// Hz.
    pub lsd_band: (f64, f64),
    /// Hz.
    pub ild_band: (f64, f64),
    pub itd_method: ItdMethod,
    pub itd_lowpass_hz: f64,
    pub match_tolerance_deg: f64,
    pub subject_id: Option<String>,
    /// Source tag of the test set, e.g. "PR" or "3D".
    pub test_source: String,
    /// Source tag of the reference, e.g. "measured" or "KEMAR".
    pub reference_source: String,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            lsd_band: DEFAULT_BAND,
            ild_band: DEFAULT_BAND,
            itd_method: ItdMethod::CrossCorrelation,
            itd_lowpass_hz: DEFAULT_LOWPASS_HZ,
            match_tolerance_deg: DEFAULT_MATCH_TOLERANCE_DEG,
            subject_id: None,
            test_source: "test".into(),
            reference_source: "reference".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub subject_id: Option<String>,
    pub test_source: String,
    pub reference_source: String,
    /// Always "uniform".
    pub direction_weighting: String,
    pub lsd_band: (f64, f64),
    pub ild_band: (f64, f64),
    pub itd_method: ItdMethod,
    pub itd_lowpass_hz: f64,
    pub frequency_bins: usize,
    pub matched_directions: usize,
    pub dropped_test_directions: usize,
    pub dropped_reference_directions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionStats {
    pub az: f64,
    pub el: f64,
    /// Over in-band frequencies, dB.
    #[serde(deserialize_with = "crate::nan::scalar")]
    pub mean_lsd_db: f64,
    #[serde(deserialize_with = "crate::nan::scalar")]
    pub max_lsd_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metadata: ReportMetadata,
    pub lsd: LsdCurve,
    pub directions: Vec<DirectionStats>,
    /// Test minus reference, seconds. Absent unless both sets carry impulse responses.
    pub itd_delta_s: Option<Vec<f64>>,
    /// Test minus reference, dB. Absent unless both sets have both ears.
    pub ild_delta_db: Option<Vec<f64>>,
}

impl ComparisonReport {
    /// Legend and column label.
    pub fn label(&self) -> String {
        match &self.metadata.subject_id {
            Some(id) => format!("{} ({id})", self.metadata.test_source),
            None => self.metadata.test_source.clone(),
        }
    }
}

fn has_both_ears(set: &HrtfSet) -> bool {
    set.ear_index(hrtf_bem::Ear::Left).is_some() && set.ear_index(hrtf_bem::Ear::Right).is_some()
}

pub fn compare(test: &HrtfSet, reference: &HrtfSet, cfg: &CompareConfig) -> Result<ComparisonReport> {
    let (t, r, summary) = resample_to_common_grid(test, reference, cfg.match_tolerance_deg)?;
    let curve = lsd(&t, &r, cfg.lsd_band.0, cfg.lsd_band.1)?;

    let in_band: Vec<usize> = (0..curve.frequencies.len())
        .filter(|&i| curve.frequencies[i] >= cfg.lsd_band.0 && curve.frequencies[i] <= cfg.lsd_band.1)
        .collect();
    let directions = t
        .directions
        .iter()
        .zip(&curve.per_direction)
        .map(|(d, row)| {
            let vals: Vec<f64> = in_band.iter().map(|&i| row[i]).filter(|v| !v.is_nan()).collect();
            let (mean, max) = if vals.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (vals.iter().sum::<f64>() / vals.len() as f64, vals.iter().copied().fold(0.0, f64::max))
            };
            DirectionStats { az: d.az, el: d.el, mean_lsd_db: mean, max_lsd_db: max }
        })
        .collect();

    let both = has_both_ears(&t);
    let itd_delta_s = if both && t.impulse.is_some() && r.impulse.is_some() {
        let a = itd(&t, cfg.itd_method, cfg.itd_lowpass_hz)?;
        let b = itd(&r, cfg.itd_method, cfg.itd_lowpass_hz)?;
        Some(a.iter().zip(&b).map(|(x, y)| x.seconds - y.seconds).collect())
    } else {
        None
    };
    let ild_delta_db = if both {
        let a = ild(&t, cfg.ild_band.0, cfg.ild_band.1)?;
        let b = ild(&r, cfg.ild_band.0, cfg.ild_band.1)?;
        Some(a.iter().zip(&b).map(|(x, y)| x - y).collect())
    } else {
        None
    };

    Ok(ComparisonReport {
        metadata: ReportMetadata {
            subject_id: cfg.subject_id.clone(),
            test_source: cfg.test_source.clone(),
            reference_source: cfg.reference_source.clone(),
            direction_weighting: "uniform".into(),
            lsd_band: cfg.lsd_band,
            ild_band: cfg.ild_band,
            itd_method: cfg.itd_method,
            itd_lowpass_hz: cfg.itd_lowpass_hz,
            frequency_bins: summary.frequency_bins,
            matched_directions: summary.matched_directions,
            dropped_test_directions: summary.dropped_a,
            dropped_reference_directions: summary.dropped_b,
        },
        lsd: curve,
        directions,
        itd_delta_s,
        ild_delta_db,
    })
}

/// Reads a list of reports written by [`crate::emit_report`].
pub fn load_reports(path: impl AsRef<std::path::Path>) -> Result<Vec<ComparisonReport>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MetricsError::Io { path: path.display().to_string(), source })?;
    Ok(serde_json::from_str(&text)?)
}
