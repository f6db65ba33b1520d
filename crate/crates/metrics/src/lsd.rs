//! Log-spectral distortion.

use hrtf_bem::HrtfSet;
use serde::{Deserialize, Serialize};

use crate::error::{MetricsError, Result};

/// Magnitudes below this are not used.
pub const MIN_MAGNITUDE: f64 = 1e-12;
/// Default summary band, Hz.
pub const DEFAULT_BAND: (f64, f64) = (200.0, 15000.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsdCurve {
    /// Hz.
    pub frequencies: Vec<f64>,
    /// RMS over directions and ears, dB. NaN where every bin was excluded.
    #[serde(deserialize_with = "crate::nan::vector")]
    pub lsd_db: Vec<f64>,
    /// `[direction][frequency]`, RMS over ears, dB.
    #[serde(deserialize_with = "crate::nan::matrix")]
    pub per_direction: Vec<Vec<f64>>,
    /// RMS of `lsd_db` over the band.
    #[serde(deserialize_with = "crate::nan::scalar")]
    pub summary_db: f64,
    /// Hz.
    pub band: (f64, f64),
    /// Bins skipped for a near-zero magnitude.
    pub excluded_bins: usize,
}

pub(crate) fn check_same_grid(a: &HrtfSet, b: &HrtfSet) -> Result<()> {
    if a.frequencies != b.frequencies {
        return Err(MetricsError::GridMismatch("frequencies differ".into()));
    }
    if a.directions.len() != b.directions.len() {
        return Err(MetricsError::GridMismatch(format!(
            "{} vs {} directions",
            a.directions.len(),
            b.directions.len()
        )));
    }
    if a.ears != b.ears {
        return Err(MetricsError::GridMismatch("ears differ".into()));
    }
    Ok(())
}

fn band_indices(freqs: &[f64], band: (f64, f64)) -> Result<Vec<usize>> {
    let (lo, hi) = band;
    if !(lo < hi) {
        return Err(MetricsError::InvalidBand(format!("{lo} Hz is not below {hi} Hz")));
    }
    let idx: Vec<usize> = (0..freqs.len()).filter(|&i| freqs[i] >= lo && freqs[i] <= hi).collect();
    if idx.is_empty() {
        return Err(MetricsError::InvalidBand(format!("no frequencies in [{lo}, {hi}] Hz")));
    }
    Ok(idx)
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values.filter(|v| !v.is_nan()) {
        sum += v * v;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        (sum / n as f64).sqrt()
    }
}

/// LSD of `test` against `reference` on a shared grid.
///
/// Bins where either magnitude is below [`MIN_MAGNITUDE`] are skipped and
/// counted. Directions are weighted uniformly.
pub fn lsd(test: &HrtfSet, reference: &HrtfSet, f_lo: f64, f_hi: f64) -> Result<LsdCurve> {
    check_same_grid(test, reference)?;
    let band = band_indices(&test.frequencies, (f_lo, f_hi))?;
    let nf = test.frequencies.len();
    let ne = test.ears.len();
    let mut excluded = 0;
    let mut per_direction = Vec::with_capacity(test.directions.len());
    let mut sum = vec![0.0; nf];
    let mut count = vec![0usize; nf];
    for d in 0..test.directions.len() {
        let mut dir_sum = vec![0.0; nf];
        let mut dir_count = vec![0usize; nf];
        for e in 0..ne {
            let (t, r) = (test.spectrum(d, e), reference.spectrum(d, e));
            for f in 0..nf {
                let (mt, mr) = (t[f].norm(), r[f].norm());
                if mt < MIN_MAGNITUDE || mr < MIN_MAGNITUDE {
                    excluded += 1;
                    continue;
                }
                let db = 20.0 * (mt / mr).log10();
                dir_sum[f] += db * db;
                dir_count[f] += 1;
            }
        }
        for f in 0..nf {
            sum[f] += dir_sum[f];
            count[f] += dir_count[f];
        }
        per_direction.push(
            dir_sum
                .iter()
                .zip(&dir_count)
                .map(|(s, &c)| if c == 0 { f64::NAN } else { (s / c as f64).sqrt() })
                .collect(),
        );
    }
    let lsd_db: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| if c == 0 { f64::NAN } else { (s / c as f64).sqrt() })
        .collect();
    let summary_db = rms(band.iter().map(|&i| lsd_db[i]));
    Ok(LsdCurve {
        frequencies: test.frequencies.clone(),
        lsd_db,
        per_direction,
        summary_db,
        band: (f_lo, f_hi),
        excluded_bins: excluded,
    })
}

/// Pointwise mean of curves on one frequency grid.
///
/// Values are summed in sorted order, so the result does not depend on the
/// order of `curves`. The per-direction matrix is averaged when all curves
/// share its shape and left empty otherwise.
pub fn average_lsd(curves: &[LsdCurve]) -> Result<LsdCurve> {
    let first = curves.first().ok_or(MetricsError::Empty("average"))?;
    for c in &curves[1..] {
        if c.frequencies != first.frequencies {
            return Err(MetricsError::GridMismatch("curves use different frequency grids".into()));
        }
        if c.band != first.band {
            return Err(MetricsError::GridMismatch("curves use different summary bands".into()));
        }
    }
    let mean = |values: &mut Vec<f64>| {
        values.sort_by(f64::total_cmp);
        values.iter().sum::<f64>() / values.len() as f64
    };
    let nf = first.frequencies.len();
    let lsd_db: Vec<f64> = (0..nf)
        .map(|f| mean(&mut curves.iter().map(|c| c.lsd_db[f]).collect()))
        .collect();
    let same_shape = curves.iter().all(|c| {
        c.per_direction.len() == first.per_direction.len()
            && c.per_direction.iter().all(|row| row.len() == nf)
    });
    let per_direction = if same_shape {
        (0..first.per_direction.len())
            .map(|d| (0..nf).map(|f| mean(&mut curves.iter().map(|c| c.per_direction[d][f]).collect())).collect())
            .collect()
    } else {
        Vec::new()
    };
    let band = band_indices(&first.frequencies, first.band)?;
    Ok(LsdCurve {
        frequencies: first.frequencies.clone(),
        summary_db: rms(band.iter().map(|&i| lsd_db[i])),
        lsd_db,
        per_direction,
        band: first.band,
        excluded_bins: curves.iter().map(|c| c.excluded_bins).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hrtf_bem::{Complex64, Ear, GridPoint};

    pub(crate) fn set(values: impl Fn(usize, usize, usize) -> Complex64) -> HrtfSet {
        let dirs: Vec<GridPoint> = (0..3).map(|i| GridPoint { az: 30.0 * i as f64, el: 0.0, r: 1.0 }).collect();
        let freqs: Vec<f64> = (1..=8).map(|i| 250.0 * i as f64).collect();
        let mut v = Vec::new();
        for d in 0..3 {
            for e in 0..2 {
                for f in 0..8 {
                    v.push(values(d, e, f));
                }
            }
        }
        HrtfSet::new(dirs, freqs, vec![Ear::Left, Ear::Right], v).unwrap()
    }

    fn base(d: usize, e: usize, f: usize) -> Complex64 {
        Complex64::from_polar(0.5 + 0.1 * (d + e) as f64 + 0.03 * f as f64, 0.3 * f as f64 - d as f64)
    }

    #[test]
    fn identical_sets_give_zero() {
        let a = set(base);
        let c = lsd(&a, &a, 200.0, 15000.0).unwrap();
        assert!(c.lsd_db.iter().all(|v| *v == 0.0));
        assert_eq!(c.summary_db, 0.0);
        assert_eq!(c.excluded_bins, 0);
    }

    #[test]
    fn uniform_gain_gives_constant_curve() {
        let a = set(base);
        let b = set(|d, e, f| base(d, e, f) * 2.0);
        let c = lsd(&b, &a, 200.0, 15000.0).unwrap();
        let expect = 20.0 * 2f64.log10();
        assert!((expect - 6.0206).abs() < 1e-4);
        for v in c.lsd_db.iter().chain(c.per_direction.iter().flatten()) {
            assert!((v - expect).abs() < 1e-12);
        }
        assert!((c.summary_db - expect).abs() < 1e-12);
    }

    #[test]
    fn phase_does_not_matter() {
        let a = set(base);
        let rot = Complex64::cis(1.234);
        let b = set(|d, e, f| base(d, e, f) * 1.5);
        let c1 = lsd(&b, &a, 200.0, 15000.0).unwrap();
        let c2 = lsd(&set(|d, e, f| base(d, e, f) * 1.5 * rot), &set(|d, e, f| base(d, e, f) * rot), 200.0, 15000.0).unwrap();
        for (x, y) in c1.lsd_db.iter().zip(&c2.lsd_db) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn near_zero_reference_bins_are_counted() {
        let a = set(|d, e, f| if d == 1 && f == 2 { Complex64::new(0.0, 0.0) } else { base(d, e, f) });
        let c = lsd(&set(base), &a, 200.0, 15000.0).unwrap();
        assert_eq!(c.excluded_bins, 2);
        assert!(c.per_direction[1][2].is_nan());
        assert!(c.lsd_db[2] == 0.0);
    }

    #[test]
    fn band_and_grid_errors() {
        let a = set(base);
        assert!(matches!(lsd(&a, &a, 500.0, 400.0), Err(MetricsError::InvalidBand(_))));
        assert!(matches!(lsd(&a, &a, 20000.0, 30000.0), Err(MetricsError::InvalidBand(_))));
        let mut b = a.clone();
        b.frequencies[0] = 240.0;
        assert!(matches!(lsd(&a, &b, 200.0, 15000.0), Err(MetricsError::GridMismatch(_))));
    }

    #[test]
    fn averaging() {
        let a = set(base);
        let zero = lsd(&a, &a, 200.0, 15000.0).unwrap();
        let six = lsd(&set(|d, e, f| base(d, e, f) * 2.0), &a, 200.0, 15000.0).unwrap();
        assert_eq!(average_lsd(&[six.clone()]).unwrap(), six);
        let avg = average_lsd(&[zero.clone(), six.clone()]).unwrap();
        for v in &avg.lsd_db {
            assert!((v - 3.0103).abs() < 1e-4);
        }
        let third = lsd(&set(|d, e, f| base(d, e, f) * (1.0 + 0.1 * f as f64)), &a, 200.0, 15000.0).unwrap();
        let x = average_lsd(&[zero.clone(), six.clone(), third.clone()]).unwrap();
        let y = average_lsd(&[third, zero.clone(), six]).unwrap();
        assert_eq!(x, y);
        let mut other = zero.clone();
        other.frequencies[3] = 1.0;
        assert!(matches!(average_lsd(&[zero, other]), Err(MetricsError::GridMismatch(_))));
        assert!(matches!(average_lsd(&[]), Err(MetricsError::Empty(_))));
    }
}
