//! Pre-simulation mesh preparation: alignment, beheading, clean-up,
//! curvature-adaptive grading and ear/skin labeling.

mod behead;
mod cleanup;
mod curvature;
mod grade;
mod icp;
mod label;

pub use behead::{behead, BeheadOutcome};
pub use cleanup::{cleanup, DEFAULT_WELD_TOL};
pub use curvature::estimate_curvature;
pub use grade::{edge_conformance, grade, SizingField};
pub use icp::{icp_align, IcpResult, IcpStatus};
pub use label::label_regions;

use crate::error::{MeshError, Result};
use crate::mesh::Vec3;

/// Sizing law `h(v) = clamp(alpha / max(|κ(v)|, kappa_floor), h_min, h_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradingParams {
    pub alpha: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub iterations: usize,
    pub smoothing_lambda: f64,
    /// Curvature floor in 1/m; bounds the target length on flat regions.
    pub kappa_floor: f64,
}

impl Default for GradingParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            h_min: 0.001,
            h_max: 0.01,
            iterations: 6,
            smoothing_lambda: 0.5,
            kappa_floor: 1.0,
        }
    }
}

impl GradingParams {
    pub fn check(&self) -> Result<()> {
        let ok = self.alpha > 0.0
            && self.h_min > 0.0
            && self.h_min < self.h_max
            && self.h_max.is_finite()
            && self.iterations >= 1
            && (0.0..=1.0).contains(&self.smoothing_lambda)
            && self.kappa_floor > 0.0;
        if ok {
            Ok(())
        } else {
            Err(MeshError::InvalidParameter(format!(
                "grading parameters out of range: {self:?}"
            )))
        }
    }

    /// Target edge length for a curvature magnitude.
    pub fn target_length(&self, kappa: f64) -> f64 {
        (self.alpha / kappa.abs().max(self.kappa_floor)).clamp(self.h_min, self.h_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutPlane {
    pub point: Vec3,
    pub normal: Vec3,
}

impl CutPlane {
    pub fn new(point: Vec3, normal: Vec3) -> Result<Self> {
        let plane = Self { point, normal };
        plane.check()?;
        Ok(plane)
    }

    pub fn check(&self) -> Result<()> {
        if (self.normal.norm() - 1.0).abs() > 1e-9 || !self.point.iter().all(|c| c.is_finite()) {
            return Err(MeshError::InvalidParameter(
                "cut plane normal must have unit length".into(),
            ));
        }
        Ok(())
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        (p - self.point).dot(&self.normal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarMarkers {
    pub left: Vec3,
    pub right: Vec3,
    pub radius: f64,
}

impl EarMarkers {
    pub fn check(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(MeshError::InvalidParameter("ear marker radius must be positive".into()));
        }
        if self.left == self.right {
            return Err(MeshError::InvalidParameter("ear markers coincide".into()));
        }
        Ok(())
    }
}
