use crate::error::{Result, SubdivError};

/// Optimizer and loss settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Squared meters.
    pub soft_hausdorff_temperature: f64,
    pub chamfer_weight: f64,
    pub hausdorff_weight: f64,
    /// Normal gate used when assigning loss faces on the truth surface.
    pub max_normal_angle_deg: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
            epochs: 200,
            batch_size: 1,
            seed: 0,
            soft_hausdorff_temperature: 1e-4,
            chamfer_weight: 1.0,
            hausdorff_weight: 0.1,
            max_normal_angle_deg: hrtf_core::correspondence::DEFAULT_MAX_NORMAL_ANGLE_DEG,
        }
    }
}

impl TrainConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(SubdivError::InvalidConfig(m.to_string()));
        // Zero is accepted and freezes the parameters.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be non-negative");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta1 and beta2 must lie in [0, 1)");
        }
        if !(self.eps_adam > 0.0) {
            return bad("eps_adam must be positive");
        }
        if !(self.soft_hausdorff_temperature > 0.0 && self.soft_hausdorff_temperature.is_finite()) {
            return bad("soft_hausdorff_temperature must be positive");
        }
        if !(self.chamfer_weight >= 0.0 && self.hausdorff_weight >= 0.0) {
            return bad("loss weights must be non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.max_normal_angle_deg > 0.0 && self.max_normal_angle_deg <= 180.0) {
            return bad("max_normal_angle_deg must lie in (0, 180]");
        }
        Ok(())
    }
}
