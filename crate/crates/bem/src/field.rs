//! Exterior pressure from the boundary representation formula
//! `p(x) = Σ_j p_j ∫_j ∂G/∂n_y dS - q_j ∫_j G dS`.

use hrtf_core::{TriangleMesh, Vec3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::assemble::elements;
use crate::error::{BemError, Result};
use crate::quadrature::{regular_integrals, TriangleRule, MAX_REFINE_DEPTH};

/// Pressure and normal derivative on every face.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceData<'a> {
    pub pressure: &'a [Complex64],
    /// `∂p/∂n` (`iωρ·v_n`).
    pub flux: &'a [Complex64],
}

pub fn evaluate_field(
    mesh: &TriangleMesh,
    surface: &SurfaceData<'_>,
    k: f64,
    points: &[Vec3],
    quadrature_order: usize,
) -> Result<Vec<Complex64>> {
    let els = elements(mesh)?;
    if surface.pressure.len() != els.len() || surface.flux.len() != els.len() {
        return Err(BemError::DimensionMismatch(format!(
            "{} faces, {} pressures, {} fluxes",
            els.len(),
            surface.pressure.len(),
            surface.flux.len()
        )));
    }
    let rule = TriangleRule::new(quadrature_order)?;
    if let Some(index) = points.iter().position(|p| mesh.winding_number(p) > 0.5) {
        return Err(BemError::PointInside { index });
    }
    let zero = Complex64::new(0.0, 0.0);
    Ok(points
        .par_iter()
        .map(|x| {
            let mut p = zero;
            for (j, el) in els.iter().enumerate() {
                let (pj, qj) = (surface.pressure[j], surface.flux[j]);
                if pj == zero && qj == zero {
                    continue;
                }
                let (s, d) = regular_integrals(k, x, el, &rule, MAX_REFINE_DEPTH);
                p += pj * d - qj * s;
            }
            p
        })
        .collect())
}
