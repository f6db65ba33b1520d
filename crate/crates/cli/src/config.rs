//! The pipeline configuration document.

use std::path::{Path, PathBuf};

use hrtf_bem::{AcousticConfig, Encoding, EvalGrid};
use hrtf_core::prep::{CutPlane, EarMarkers, GradingParams, DEFAULT_WELD_TOL};
use hrtf_core::validate::DEFAULT_AREA_EPS;
use hrtf_core::Vec3;
use hrtf_metrics::{CompareConfig, ItdMethod};
use hrtf_subdiv::params::{DEFAULT_FEATURE_DIM, DEFAULT_HIDDEN, DEFAULT_LEVELS};
use hrtf_subdiv::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub io: IoConfig,
    pub prep: Option<PrepConfig>,
    pub model: Option<ModelConfig>,
    pub bem: Option<BemConfig>,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub seed: u64,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(usage(format!("config {}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn prep(&self) -> Result<&PrepConfig> {
        self.prep.as_ref().ok_or_else(|| missing("prep"))
    }

    pub fn model(&self) -> Result<&ModelConfig> {
        self.model.as_ref().ok_or_else(|| missing("model"))
    }

    pub fn bem(&self) -> Result<&BemConfig> {
        self.bem.as_ref().ok_or_else(|| missing("bem"))
    }
}

fn missing(section: &str) -> CliError {
    CliError::Usage(format!("config is missing the `{section}` section"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    /// Multiplies STL coordinates, e.g. 0.001 for millimeter files.
    pub unit_scale: f64,
    /// Alignment target for `prep`; ICP is skipped when absent.
    pub reference_mesh: Option<PathBuf>,
    pub hrtf_encoding: Encoding,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self {
            unit_scale: 1.0,
            reference_mesh: None,
            hrtf_encoding: Encoding::Base64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneSpec {
    pub point: [f64; 3],
    /// Normalized on use; the kept side is the one it points to.
    pub normal: [f64; 3],
}

impl PlaneSpec {
    pub fn plane(&self) -> Result<CutPlane> {
        let n = Vec3::from(self.normal);
        if !(n.norm() > 0.0) {
            return Err(CliError::Usage(
                "prep.cut_plane.normal must be non-zero".into(),
            ));
        }
        CutPlane::new(Vec3::from(self.point), n.normalize()).map_err(usage("prep.cut_plane"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarMarkerSpec {
    pub left: [f64; 3],
    pub right: [f64; 3],
    /// Meters.
    pub radius: f64,
}

impl EarMarkerSpec {
    pub fn markers(&self) -> EarMarkers {
        EarMarkers {
            left: Vec3::from(self.left),
            right: Vec3::from(self.right),
            radius: self.radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradingSpec {
    pub alpha: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub iterations: usize,
    pub smoothing_lambda: f64,
    pub kappa_floor: f64,
}

impl Default for GradingSpec {
    fn default() -> Self {
        let g = GradingParams::default();
        Self {
            alpha: g.alpha,
            h_min: g.h_min,
            h_max: g.h_max,
            iterations: g.iterations,
            smoothing_lambda: g.smoothing_lambda,
            kappa_floor: g.kappa_floor,
        }
    }
}

impl GradingSpec {
    pub fn params(&self) -> GradingParams {
        GradingParams {
            alpha: self.alpha,
            h_min: self.h_min,
            h_max: self.h_max,
            iterations: self.iterations,
            smoothing_lambda: self.smoothing_lambda,
            kappa_floor: self.kappa_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcpSpec {
    pub max_iters: usize,
    pub convergence_eps: f64,
}

impl Default for IcpSpec {
    fn default() -> Self {
        Self {
            max_iters: 50,
            convergence_eps: 1e-8,
        }
    }
}

fn default_weld_tol() -> f64 {
    DEFAULT_WELD_TOL
}

fn default_area_eps() -> f64 {
    DEFAULT_AREA_EPS
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepConfig {
    #[serde(default = "default_weld_tol")]
    pub weld_tol: f64,
    #[serde(default = "default_area_eps")]
    pub area_eps: f64,
    /// Beheading is skipped when absent.
    #[serde(default)]
    pub cut_plane: Option<PlaneSpec>,
    pub ear_markers: EarMarkerSpec,
    #[serde(default = "default_true")]
    pub grade: bool,
    #[serde(default)]
    pub grading: GradingSpec,
    #[serde(default)]
    pub icp: IcpSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSpec {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub soft_hausdorff_temperature: f64,
    pub chamfer_weight: f64,
    pub hausdorff_weight: f64,
    pub max_normal_angle_deg: f64,
}

impl Default for TrainSpec {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            learning_rate: t.learning_rate,
            beta1: t.beta1,
            beta2: t.beta2,
            eps_adam: t.eps_adam,
            epochs: t.epochs,
            batch_size: t.batch_size,
            soft_hausdorff_temperature: t.soft_hausdorff_temperature,
            chamfer_weight: t.chamfer_weight,
            hausdorff_weight: t.hausdorff_weight,
            max_normal_angle_deg: t.max_normal_angle_deg,
        }
    }
}

impl TrainSpec {
    pub fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            eps_adam: self.eps_adam,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
            soft_hausdorff_temperature: self.soft_hausdorff_temperature,
            chamfer_weight: self.chamfer_weight,
            hausdorff_weight: self.hausdorff_weight,
            max_normal_angle_deg: self.max_normal_angle_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub feature_dim: usize,
    pub hidden: Vec<usize>,
    pub levels: usize,
    pub train: TrainSpec,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            feature_dim: DEFAULT_FEATURE_DIM,
            hidden: DEFAULT_HIDDEN.to_vec(),
            levels: DEFAULT_LEVELS,
            train: TrainSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HrirSpec {
    pub sample_rate: f64,
    pub taps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSpec {
    /// Sphere radius, m.
    pub radius: f64,
    /// Series length; derived per frequency when absent.
    pub terms: Option<usize>,
    /// Ear cap half-angle when no labeled mesh is given, degrees.
    pub cap_half_angle_deg: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            radius: 0.0875,
            terms: None,
            cap_half_angle_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BemConfig {
    pub acoustic: AcousticConfig,
    pub grid: EvalGrid,
    /// Impulse responses are attached when present.
    pub hrir: Option<HrirSpec>,
    pub oracle: OracleSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub lsd_band: (f64, f64),
    pub ild_band: (f64, f64),
    pub itd_method: ItdMethod,
    pub itd_lowpass_hz: f64,
    pub match_tolerance_deg: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        let c = CompareConfig::default();
        Self {
            lsd_band: c.lsd_band,
            ild_band: c.ild_band,
            itd_method: c.itd_method,
            itd_lowpass_hz: c.itd_lowpass_hz,
            match_tolerance_deg: c.match_tolerance_deg,
        }
    }
}

impl MetricsConfig {
    pub fn compare_config(
        &self,
        subject_id: Option<String>,
        test_source: String,
        reference_source: String,
    ) -> CompareConfig {
        CompareConfig {
            lsd_band: self.lsd_band,
            ild_band: self.ild_band,
            itd_method: self.itd_method,
            itd_lowpass_hz: self.itd_lowpass_hz,
            match_tolerance_deg: self.match_tolerance_deg,
            subject_id,
            test_source,
            reference_source,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_uses_defaults() {
        let c = PipelineConfig::parse("{}").unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert!(c.bem().is_err());
    }

    #[test]
    fn unknown_keys_rejected_at_every_level() {
        for doc in [
            r#"{"sede": 1}"#,
            r#"{"io": {"unit_scal": 1}}"#,
            r#"{"model": {"train": {"epoch": 3}}}"#,
            r#"{"bem": {"acoustic": {"soundspeed": 340}}}"#,
            r#"{"metrics": {"lsd": [1, 2]}}"#,
        ] {
            let err = PipelineConfig::parse(doc).unwrap_err();
            assert!(matches!(err, CliError::Usage(_)), "{doc}");
        }
    }

    #[test]
    fn prep_requires_ear_markers() {
        let err = PipelineConfig::parse(r#"{"prep": {"weld_tol": 1e-6}}"#).unwrap_err();
        assert!(err.to_string().contains("ear_markers"), "{err}");
    }

    #[test]
    fn sections_parse() {
        let c = PipelineConfig::parse(
            r#"{
                "seed": 9,
                "prep": {"ear_markers": {"left": [0, 0.1, 0], "right": [0, -0.1, 0], "radius": 0.02},
                         "cut_plane": {"point": [0, 0, -0.05], "normal": [0, 0, 2]}},
                "model": {"feature_dim": 8, "levels": 1, "train": {"epochs": 3}},
                "bem": {"acoustic": {"frequencies": [500, 1000]}, "hrir": {"sample_rate": 48000, "taps": 256}},
                "metrics": {"itd_method": "threshold_onset"}
            }"#,
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        let plane = c
            .prep()
            .unwrap()
            .cut_plane
            .as_ref()
            .unwrap()
            .plane()
            .unwrap();
        assert!((plane.normal.norm() - 1.0).abs() < 1e-15);
        assert_eq!(c.model().unwrap().train.config(c.seed).epochs, 3);
        assert_eq!(c.model().unwrap().hidden, DEFAULT_HIDDEN.to_vec());
        assert_eq!(c.bem().unwrap().acoustic.frequencies, vec![500.0, 1000.0]);
        assert_eq!(c.metrics.itd_method, ItdMethod::ThresholdOnset);
    }
}
