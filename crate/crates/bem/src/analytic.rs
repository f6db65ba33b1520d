//! Series solution for a vibrating source on a rigid sphere centered at the origin.
//!
//! A source of volume velocity `Q` at direction `ŝ` on a sphere of radius `a`
//! radiates
//!
//! ```text
//! p(r, γ) = iωρQ/(4πa²k) · Σ_n (2n+1) F_n h_n(kr) P_n(cos γ) / h_n'(ka)
//! ```
//!
//! with `h_n` the spherical Hankel function of the first kind and `F_n = 1`
//! for a point source. A uniform cap of half-angle `α` uses
//! `F_n = (P_{n-1}(cos α) - P_{n+1}(cos α)) / ((2n+1)(1 - cos α))`.

use hrtf_core::Vec3;
use num_complex::Complex64;

use crate::config::Medium;
use crate::error::{BemError, Result};
use crate::green::FOUR_PI;

/// Tail bound allowed relative to the value.
pub const TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSource {
    /// Point on the sphere.
    pub position: Vec3,
    /// m³/s.
    pub volume_velocity: f64,
    /// Radians; 0 for a point source.
    pub cap_half_angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResponse {
    pub pressure: Vec<Complex64>,
    /// Bound on the magnitude of the omitted terms, per point.
    pub tail_bound: Vec<f64>,
}

/// Minimum series length for wavenumber `k` on a sphere of radius `a`.
pub fn required_terms(k: f64, radius: f64) -> usize {
    (k * radius + 20.0).ceil() as usize
}

pub fn analytic_sphere_response(
    radius: f64,
    source: &SphereSource,
    points: &[Vec3],
    k: f64,
    terms: usize,
    medium: &Medium,
) -> Result<SeriesResponse> {
    if !(radius > 0.0 && k > 0.0 && k.is_finite()) {
        return Err(BemError::InvalidConfig(format!("radius {radius} and wavenumber {k} must be positive")));
    }
    if ((source.position.norm() - radius) / radius).abs() > 1e-6 {
        return Err(BemError::InvalidConfig("source must lie on the sphere".into()));
    }
    let alpha = source.cap_half_angle;
    if !(0.0..std::f64::consts::PI).contains(&alpha) {
        return Err(BemError::InvalidConfig(format!("cap half-angle {alpha} outside [0, π)")));
    }
    let required = required_terms(k, radius);
    if terms < required {
        return Err(BemError::TooFewTerms { terms, required });
    }
    let dir = source.position / source.position.norm();
    let c_cap = alpha.cos();
    let cap = (alpha > 0.0).then(|| legendre(c_cap, terms + 1));
    // |F_n| ≤ 2 / ((2n+1)(1 - cos α)) for the envelope.
    let cap_factor = |n: usize| match &cap {
        None => (1.0, 1.0),
        Some(p) => {
            let below = if n == 0 { 1.0 } else { p[n - 1] };
            let d = (2 * n + 1) as f64 * (1.0 - c_cap);
            ((below - p[n + 1]) / d, 2.0 / d)
        }
    };
    let prefactor = Complex64::new(0.0, medium.sound_speed * medium.density * source.volume_velocity / (FOUR_PI * radius * radius));
    let hp_a = hankel_derivative(k * radius, terms)?;

    let mut pressure = Vec::with_capacity(points.len());
    let mut tail_bound = Vec::with_capacity(points.len());
    for x in points {
        let r = x.norm();
        if !(r > radius) {
            return Err(BemError::InvalidConfig(format!("field point at r = {r} is not outside the sphere")));
        }
        let h_r = hankel(k * r, terms)?;
        let p = legendre(x.dot(&dir) / r, terms);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut envelope = [0.0; 2];
        for n in 0..terms {
            let (f, f_env) = cap_factor(n);
            let ratio = scaled_div(h_r[n], hp_a[n]) * (2 * n + 1) as f64;
            sum += ratio * (f * p[n]);
            envelope = [envelope[1], ratio.norm() * f_env];
        }
        let value = (prefactor * sum).norm();
        let rho = envelope[1] / envelope[0];
        let bound = if rho < 1.0 { prefactor.norm() * envelope[1] * rho / (1.0 - rho) } else { f64::INFINITY };
        if !(bound <= TAIL_TOLERANCE * value) {
            return Err(BemError::SeriesNotConverged { terms, tail_bound: bound, value });
        }
        pressure.push(prefactor * sum);
        tail_bound.push(bound);
    }
    Ok(SeriesResponse { pressure, tail_bound })
}

/// `a / b` without overflowing `|b|²`.
fn scaled_div(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.re.abs().max(b.im.abs());
    (a / s) / (b / s)
}

/// `P_0..P_{n-1}` at `c`.
pub(crate) fn legendre(c: f64, n: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(n);
    for l in 0..n {
        p.push(match l {
            0 => 1.0,
            1 => c,
            _ => ((2 * l - 1) as f64 * c * p[l - 1] - (l - 1) as f64 * p[l - 2]) / l as f64,
        });
    }
    p
}

/// Spherical Bessel `j_0..j_{n-1}` by normalized downward recurrence.
pub(crate) fn bessel_j(x: f64, n: usize) -> Vec<f64> {
    let start = n.max(x.ceil() as usize) + 50;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for l in (1..=start).rev() {
        j[l - 1] = (2 * l + 1) as f64 / x * j[l] - j[l + 1];
        if j[l - 1].abs() > 1e250 {
            j.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    let (j0, j1) = (x.sin() / x, x.sin() / (x * x) - x.cos() / x);
    let scale = if j0.abs() >= j1.abs() { j0 / j[0] } else { j1 / j[1] };
    j.truncate(n);
    j.iter_mut().for_each(|v| *v *= scale);
    j
}

/// Spherical Neumann `y_0..y_{n-1}` by upward recurrence.
pub(crate) fn bessel_y(x: f64, n: usize) -> Result<Vec<f64>> {
    let mut y = Vec::with_capacity(n.max(2));
    y.push(-x.cos() / x);
    y.push(-x.cos() / (x * x) - x.sin() / x);
    for l in 1..n.saturating_sub(1) {
        y.push((2 * l + 1) as f64 / x * y[l] - y[l - 1]);
    }
    y.truncate(n);
    if y.iter().all(|v| v.is_finite()) {
        Ok(y)
    } else {
        Err(BemError::InvalidConfig(format!("spherical Bessel overflow at x = {x:e} with {n} terms")))
    }
}

/// `h_n = j_n + i y_n`.
pub(crate) fn hankel(x: f64, n: usize) -> Result<Vec<Complex64>> {
    let j = bessel_j(x, n);
    let y = bessel_y(x, n)?;
    Ok(j.iter().zip(&y).map(|(a, b)| Complex64::new(*a, *b)).collect())
}

/// `h_n'(x)` from `h_n' = h_{n-1} - (n+1)/x h_n` and `h_0' = -h_1`.
pub(crate) fn hankel_derivative(x: f64, n: usize) -> Result<Vec<Complex64>> {
    let h = hankel(x, n + 1)?;
    Ok((0..n)
        .map(|l| if l == 0 { -h[1] } else { h[l - 1] - h[l] * ((l + 1) as f64 / x) })
        .collect())
}
