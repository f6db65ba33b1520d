//! Dense least squares by Householder QR.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::qr::no_pivoting::{factor, solve};
use faer::{Conj, Mat, MatRef, Par};
use num_complex::Complex64;

use crate::assemble::BemSystem;
use crate::error::{BemError, Result};

/// Relative residual above which a warning is logged.
pub const RESIDUAL_WARN: f64 = 1e-6;
/// Relative residual above which the solve fails.
pub const RESIDUAL_FAIL: f64 = 1e-2;
/// Smallest accepted `min|R_kk| / max|R_kk|`.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    /// `N × rhs` solution.
    pub solution: Mat<Complex64>,
    /// `‖Ax - b‖ / ‖b‖` per right-hand side (0 for a zero rhs).
    pub relative_residual: Vec<f64>,
}

/// Surface pressure for every source of an assembled system.
#[derive(Debug, Clone)]
pub struct SurfaceSolution {
    /// Pa, one vector per source.
    pub pressure: Vec<Vec<Complex64>>,
    pub relative_residual: Vec<f64>,
}

pub fn solve(system: &BemSystem) -> Result<SurfaceSolution> {
    let ls = solve_least_squares(system.matrix.as_ref(), system.rhs.as_ref())?;
    let n = ls.solution.nrows();
    let pressure = (0..ls.solution.ncols())
        .map(|c| (0..n).map(|i| ls.solution[(i, c)]).collect())
        .collect();
    Ok(SurfaceSolution {
        pressure,
        relative_residual: ls.relative_residual,
    })
}

/// Minimizes `‖Ax - b‖` for every column of `b`, with `A` of full column rank.
///
/// Runs single-threaded inside the factorization so results are independent
/// of the thread pool.
pub fn solve_least_squares(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> Result<LeastSquares> {
    let (m, n) = a.shape();
    if m < n || b.nrows() != m || n == 0 {
        return Err(BemError::DimensionMismatch(format!(
            "least squares needs rows ≥ cols > 0 and matching rhs: A {m}×{n}, b {}×{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let par = Par::Seq;
    let mut qr = a.to_owned();
    let block = factor::recommended_block_size::<Complex64>(m, n);
    let mut coeff = Mat::<Complex64>::zeros(block, n);
    factor::qr_in_place(
        qr.as_mut(),
        coeff.as_mut(),
        par,
        MemStack::new(&mut MemBuffer::new(factor::qr_in_place_scratch::<Complex64>(
            m,
            n,
            block,
            par,
            Default::default(),
        ))),
        Default::default(),
    );

    let diag: Vec<f64> = (0..n).map(|i| qr[(i, i)].norm()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(ratio >= RANK_TOLERANCE) {
        return Err(BemError::RankDeficient { ratio });
    }

    let mut x = b.to_owned();
    solve::solve_lstsq_in_place_with_conj(
        qr.get(.., ..n),
        coeff.as_ref(),
        qr.get(..n, ..),
        Conj::No,
        x.as_mut(),
        par,
        MemStack::new(&mut MemBuffer::new(solve::solve_lstsq_in_place_scratch::<Complex64>(
            m,
            n,
            block,
            b.ncols(),
            par,
        ))),
    );

    // Rows n.. of Qᴴb are the residual components.
    let mut relative_residual = Vec::with_capacity(b.ncols());
    for c in 0..b.ncols() {
        let bn = (0..m).map(|i| b[(i, c)].norm_sqr()).sum::<f64>().sqrt();
        let rn = (n..m).map(|i| x[(i, c)].norm_sqr()).sum::<f64>().sqrt();
        let rel = if bn > 0.0 { rn / bn } else { 0.0 };
        if !rel.is_finite() || rel > RESIDUAL_FAIL {
            return Err(BemError::Residual(rel));
        }
        if rel > RESIDUAL_WARN {
            log::warn!("least-squares relative residual {rel:.3e} for rhs {c}");
        }
        relative_residual.push(rel);
    }
    Ok(LeastSquares {
        solution: x.get(..n, ..).to_owned(),
        relative_residual,
    })
}
