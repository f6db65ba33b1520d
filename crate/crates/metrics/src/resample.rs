//! Bringing two HRTF sets onto shared frequency and direction grids.

use hrtf_bem::{Complex64, Ear, GridPoint, HrtfSet, ImpulseResponses};
use serde::{Deserialize, Serialize};

use crate::error::{MetricsError, Result};

/// Default great-circle tolerance for matching directions, degrees.
pub const DEFAULT_MATCH_TOLERANCE_DEG: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleSummary {
    pub frequency_bins: usize,
    pub matched_directions: usize,
    pub dropped_a: usize,
    pub dropped_b: usize,
}

/// Great-circle angle between two grid directions, degrees.
pub fn angular_distance_deg(a: &GridPoint, b: &GridPoint) -> f64 {
    let u = |p: &GridPoint| {
        let (az, el) = (p.az.to_radians(), p.el.to_radians());
        [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()]
    };
    let (p, q) = (u(a), u(b));
    let dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    let cross = [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    sin.atan2(dot).to_degrees()
}

/// One-to-one direction pairs `(index in a, index in b)`, ordered by `a`.
///
/// Candidate pairs within tolerance are taken greedily, closest first.
pub fn match_directions(a: &[GridPoint], b: &[GridPoint], tolerance_deg: f64) -> Vec<(usize, usize)> {
    let mut candidates = Vec::new();
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            let d = angular_distance_deg(p, q);
            if d <= tolerance_deg {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort();
    pairs
}

fn median_spacing(freqs: &[f64]) -> f64 {
    let mut d: Vec<f64> = freqs.windows(2).map(|w| w[1] - w[0]).collect();
    if d.is_empty() {
        return f64::INFINITY;
    }
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

fn interpolate(freqs: &[f64], values: &[Complex64], f: f64) -> Complex64 {
    let j = freqs.partition_point(|&x| x < f);
    if j < freqs.len() && freqs[j] == f {
        return values[j];
    }
    // Overlap guarantees 0 < j < len here.
    let t = (f - freqs[j - 1]) / (freqs[j] - freqs[j - 1]);
    values[j - 1] * (1.0 - t) + values[j] * t
}

fn rebuild(set: &HrtfSet, dirs: &[usize], ears: &[Ear], freqs: &[f64]) -> Result<HrtfSet> {
    let ear_idx: Vec<usize> = ears.iter().map(|&e| set.ear_index(e).expect("shared ear")).collect();
    let same_freqs = freqs == set.frequencies.as_slice();
    let mut values = Vec::with_capacity(dirs.len() * ears.len() * freqs.len());
    for &d in dirs {
        for &e in &ear_idx {
            let spec = set.spectrum(d, e);
            if same_freqs {
                values.extend_from_slice(spec);
            } else {
                values.extend(freqs.iter().map(|&f| interpolate(&set.frequencies, spec, f)));
            }
        }
    }
    let mut out = HrtfSet::new(dirs.iter().map(|&d| set.directions[d]).collect(), freqs.to_vec(), ears.to_vec(), values)?;
    if let Some(ir) = &set.impulse {
        let mut data = Vec::with_capacity(dirs.len() * ears.len() * ir.taps);
        for &d in dirs {
            for &e in &ear_idx {
                data.extend_from_slice(set.impulse_response(d, e).expect("impulse present"));
            }
        }
        out.impulse = Some(ImpulseResponses { sample_rate: ir.sample_rate, taps: ir.taps, data });
    }
    Ok(out)
}

/// Restrict both sets to matched directions, shared ears and the coarser
/// frequency grid over the overlapping band.
pub fn resample_to_common_grid(a: &HrtfSet, b: &HrtfSet, tolerance_deg: f64) -> Result<(HrtfSet, HrtfSet, ResampleSummary)> {
    if !(tolerance_deg >= 0.0) {
        return Err(MetricsError::InvalidParameter(format!("tolerance {tolerance_deg}° must be non-negative")));
    }
    let (Some(&a0), Some(&a1), Some(&b0), Some(&b1)) =
        (a.frequencies.first(), a.frequencies.last(), b.frequencies.first(), b.frequencies.last())
    else {
        return Err(MetricsError::NoOverlap);
    };
    let (lo, hi) = (a0.max(b0), a1.min(b1));
    if lo > hi {
        return Err(MetricsError::NoOverlap);
    }
    let in_band = |fs: &[f64]| fs.iter().copied().filter(|&f| f >= lo && f <= hi).collect::<Vec<f64>>();
    let (fa, fb) = (in_band(&a.frequencies), in_band(&b.frequencies));
    // The grid with fewer bins in band wins; ties go to the wider spacing, then to `a`.
    let take_b = !fb.is_empty()
        && (fa.is_empty() || fb.len() < fa.len() || (fb.len() == fa.len() && median_spacing(&fb) > median_spacing(&fa)));
    let freqs = if take_b { fb } else { fa };
    if freqs.is_empty() {
        return Err(MetricsError::NoOverlap);
    }

    let pairs = match_directions(&a.directions, &b.directions, tolerance_deg);
    if pairs.is_empty() {
        return Err(MetricsError::NoMatchedDirections { tolerance_deg });
    }
    let ears: Vec<Ear> = a.ears.iter().copied().filter(|e| b.ears.contains(e)).collect();
    if ears.is_empty() {
        return Err(MetricsError::GridMismatch("no ear in common".into()));
    }
    let (da, db): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
    let summary = ResampleSummary {
        frequency_bins: freqs.len(),
        matched_directions: pairs.len(),
        dropped_a: a.directions.len() - pairs.len(),
        dropped_b: b.directions.len() - pairs.len(),
    };
    Ok((rebuild(a, &da, &ears, &freqs)?, rebuild(b, &db, &ears, &freqs)?, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_set(freqs: Vec<f64>, dirs: Vec<(f64, f64)>) -> HrtfSet {
        let ears = vec![Ear::Left, Ear::Right];
        let mut values = Vec::new();
        for (d, _) in dirs.iter().enumerate() {
            for e in 0..2 {
                values.extend(freqs.iter().map(|&f| Complex64::new(1.0 + 1e-3 * f + d as f64, 2.0 - 1e-4 * f * (e + 1) as f64)));
            }
        }
        let dirs = dirs.into_iter().map(|(az, el)| GridPoint { az, el, r: 1.2 }).collect();
        HrtfSet::new(dirs, freqs, ears, values).unwrap()
    }

    #[test]
    fn identical_grids_unchanged() {
        let a = linear_set(vec![100.0, 200.0, 300.0], vec![(0.0, 0.0), (90.0, 0.0)]);
        let (x, y, s) = resample_to_common_grid(&a, &a, 2.0).unwrap();
        assert_eq!(x, a);
        assert_eq!(y, a);
        assert_eq!((s.matched_directions, s.dropped_a, s.dropped_b, s.frequency_bins), (2, 0, 0, 3));
    }

    #[test]
    fn fine_grid_interpolated_onto_coarse() {
        let coarse = linear_set((1..=10).map(|i| 100.0 * i as f64).collect(), vec![(0.0, 0.0)]);
        let fine = linear_set((2..=30).map(|i| 50.0 * i as f64).collect(), vec![(0.0, 0.0)]);
        let (x, y, s) = resample_to_common_grid(&fine, &coarse, 2.0).unwrap();
        assert_eq!(x.frequencies, coarse.frequencies);
        assert_eq!(y.frequencies, coarse.frequencies);
        assert_eq!(s.frequency_bins, 10);
        // Linear spectra interpolate exactly.
        for (u, v) in x.values.iter().zip(&y.values) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn interpolation_between_bins_is_linear() {
        let a = linear_set(vec![0.0, 1000.0], vec![(0.0, 0.0)]);
        let b = linear_set(vec![250.0, 500.0, 750.0], vec![(0.0, 0.0)]);
        let (x, _, _) = resample_to_common_grid(&a, &b, 2.0).unwrap();
        // No bin of `a` falls inside the overlap, so b's grid is used.
        let want = linear_set(vec![250.0, 500.0, 750.0], vec![(0.0, 0.0)]);
        assert_eq!(x.frequencies.len(), 3);
        for (u, v) in x.values.iter().zip(&want.values) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn unmatched_directions_dropped() {
        let a = linear_set(vec![100.0, 200.0], vec![(0.0, 0.0), (45.0, 0.0), (90.0, 0.0)]);
        let b = linear_set(vec![100.0, 200.0], vec![(1.5, 0.0), (90.0, 1.0), (180.0, 0.0), (0.5, 0.5)]);
        let (x, y, s) = resample_to_common_grid(&a, &b, 2.0).unwrap();
        assert_eq!(s.matched_directions, 2);
        assert_eq!((s.dropped_a, s.dropped_b), (1, 2));
        assert_eq!(x.directions.iter().map(|d| d.az).collect::<Vec<_>>(), vec![0.0, 90.0]);
        // The closer of the two candidates near 0° wins.
        assert_eq!(y.directions.iter().map(|d| d.az).collect::<Vec<_>>(), vec![0.5, 90.0]);
    }

    #[test]
    fn errors_on_disjoint_grids() {
        let a = linear_set(vec![100.0, 200.0], vec![(0.0, 0.0)]);
        let b = linear_set(vec![300.0, 400.0], vec![(0.0, 0.0)]);
        assert!(matches!(resample_to_common_grid(&a, &b, 2.0), Err(MetricsError::NoOverlap)));
        let c = linear_set(vec![100.0, 200.0], vec![(10.0, 0.0)]);
        assert!(matches!(resample_to_common_grid(&a, &c, 2.0), Err(MetricsError::NoMatchedDirections { .. })));
    }

    #[test]
    fn angular_distance_handles_poles_and_wrap() {
        let p = |az, el| GridPoint { az, el, r: 1.0 };
        assert!((angular_distance_deg(&p(359.0, 0.0), &p(1.0, 0.0)) - 2.0).abs() < 1e-9);
        assert!(angular_distance_deg(&p(0.0, 90.0), &p(123.0, 90.0)) < 1e-9);
        assert!((angular_distance_deg(&p(0.0, 0.0), &p(180.0, 0.0)) - 180.0).abs() < 1e-9);
    }
}
