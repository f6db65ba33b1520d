//! Free-space Helmholtz kernel `G = e^{ikr}/(4πr)` (time factor `e^{-iωt}`).

use hrtf_core::Vec3;
use num_complex::Complex64;

use crate::error::{BemError, Result};

pub(crate) const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Distances below this are treated as singular.
pub const SINGULAR_DISTANCE: f64 = 1e-12;

pub fn green(k: f64, x: &Vec3, y: &Vec3) -> Result<Complex64> {
    let r = (y - x).norm();
    if r < SINGULAR_DISTANCE {
        return Err(BemError::SingularPoint(r));
    }
    Ok(Complex64::cis(k * r) / (FOUR_PI * r))
}

/// `∂G/∂n_y` for the unit normal `n` at `y`.
pub fn green_normal_derivative(k: f64, x: &Vec3, y: &Vec3, n: &Vec3) -> Result<Complex64> {
    let d = y - x;
    let r = d.norm();
    if r < SINGULAR_DISTANCE {
        return Err(BemError::SingularPoint(r));
    }
    Ok(kernels(k, &d, n).1)
}

/// `(G, ∂G/∂n_y)` for `d = y - x`, unchecked.
#[inline]
pub(crate) fn kernels(k: f64, d: &Vec3, n: &Vec3) -> (Complex64, Complex64) {
    let r = d.norm();
    let g = Complex64::cis(k * r) / (FOUR_PI * r);
    let dg = g * Complex64::new(-1.0 / r, k) * (d.dot(n) / r);
    (g, dg)
}
