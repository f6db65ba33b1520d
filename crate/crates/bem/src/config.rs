use hrtf_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{BemError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcousticConfig {
    /// m/s.
    pub sound_speed: f64,
    /// kg/m³.
    pub density: f64,
    /// Hz, ascending.
    pub frequencies: Vec<f64>,
    /// Points of the triangle rule for off-diagonal integrals.
    pub quadrature_order: usize,
    pub chief_point_count: usize,
    /// Seed for CHIEF point placement.
    pub chief_seed: u64,
}

impl Default for AcousticConfig {
    fn default() -> Self {
        Self {
            sound_speed: 343.0,
            density: 1.1839,
            frequencies: default_frequencies(),
            quadrature_order: 7,
            chief_point_count: 16,
            chief_seed: 0,
        }
    }
}

/// 100 Hz to 16 kHz in 100 Hz steps.
pub fn default_frequencies() -> Vec<f64> {
    (1..=160).map(|i| 100.0 * i as f64).collect()
}

impl AcousticConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(BemError::InvalidConfig(m));
        if !(self.sound_speed > 0.0 && self.sound_speed.is_finite()) {
            return bad(format!("sound_speed must be positive, got {}", self.sound_speed));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return bad(format!("density must be positive, got {}", self.density));
        }
        if self.frequencies.is_empty() {
            return bad("frequency list is empty".into());
        }
        if !self.frequencies.iter().all(|f| *f > 0.0 && f.is_finite()) {
            return bad("frequencies must be positive".into());
        }
        if self.frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return bad("frequencies must be strictly ascending".into());
        }
        if self.chief_point_count < 4 {
            return bad(format!("chief_point_count must be at least 4, got {}", self.chief_point_count));
        }
        crate::quadrature::TriangleRule::new(self.quadrature_order)?;
        Ok(())
    }

    pub fn wavenumber(&self, frequency: f64) -> f64 {
        2.0 * std::f64::consts::PI * frequency / self.sound_speed
    }

    pub fn medium(&self) -> Medium {
        Medium {
            sound_speed: self.sound_speed,
            density: self.density,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub sound_speed: f64,
    pub density: f64,
}

impl Default for Medium {
    fn default() -> Self {
        AcousticConfig::default().medium()
    }
}

/// Azimuth and elevation in degrees. Azimuth 0 is straight ahead (+x), 90 is
/// the listener's left (+y); elevation 90 is up (+z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDirection {
    pub az: f64,
    pub el: f64,
}

impl GridDirection {
    pub fn new(az: f64, el: f64) -> Self {
        Self { az, el }
    }

    pub fn unit_vector(&self) -> Vec3 {
        let (az, el) = (self.az.to_radians(), self.el.to_radians());
        Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalGrid {
    pub directions: Vec<GridDirection>,
    /// Meters from the head origin.
    pub radius: f64,
}

impl Default for EvalGrid {
    /// 72 azimuths at 5° for elevations -30..30 in 15° steps, 1.2 m.
    fn default() -> Self {
        let mut directions = Vec::with_capacity(5 * 72);
        for el in [-30.0, -15.0, 0.0, 15.0, 30.0] {
            for i in 0..72 {
                directions.push(GridDirection::new(5.0 * i as f64, el));
            }
        }
        Self { directions, radius: 1.2 }
    }
}

impl EvalGrid {
    /// Horizontal ring of `count` equally spaced azimuths.
    pub fn ring(count: usize, radius: f64) -> Self {
        Self {
            directions: (0..count).map(|i| GridDirection::new(360.0 * i as f64 / count as f64, 0.0)).collect(),
            radius,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.directions.is_empty() {
            return Err(BemError::InvalidGrid("no directions".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(BemError::InvalidGrid(format!("radius must be positive, got {}", self.radius)));
        }
        for (i, d) in self.directions.iter().enumerate() {
            if !(0.0..360.0).contains(&d.az) || !(-90.0..=90.0).contains(&d.el) {
                return Err(BemError::InvalidGrid(format!(
                    "direction {i} ({}, {}) outside az [0,360), el [-90,90]",
                    d.az, d.el
                )));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Vec3> {
        self.directions.iter().map(|d| d.unit_vector() * self.radius).collect()
    }
}
