//! Impulse responses from a one-sided transfer spectrum.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{BemError, Result};
use crate::hrtf::{HrtfSet, ImpulseResponses};

/// Allowed deviation of a grid frequency from `k·df`, relative to `df`.
const GRID_TOLERANCE: f64 = 1e-6;

/// Adds impulse responses of length `taps` at `sample_rate`.
///
/// The frequencies must be `df, 2df, …, K·df` with `df = sample_rate/taps` and
/// `K ≤ taps/2`; bins above `K` are zero. DC is `|H|` at the lowest frequency,
/// the Nyquist bin keeps only its real part, and the response is rotated by
/// `taps/4` samples so that zero delay lands at index `taps/4`. Values use the
/// `e^{-iωτ}`-is-a-delay convention.
pub fn hrtf_to_hrir(set: &HrtfSet, sample_rate: f64, taps: usize) -> Result<HrtfSet> {
    set.check()?;
    if taps < 4 || taps % 2 != 0 {
        return Err(BemError::InvalidConfig(format!("taps must be even and at least 4, got {taps}")));
    }
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(BemError::InvalidConfig(format!("sample rate must be positive, got {sample_rate}")));
    }
    let df = sample_rate / taps as f64;
    let half = taps / 2;
    let nf = set.frequencies.len();
    if nf == 0 || nf > half {
        return Err(BemError::NonUniformGrid(format!("{nf} frequencies for {taps} taps (at most {half})")));
    }
    for (i, f) in set.frequencies.iter().enumerate() {
        let expect = (i + 1) as f64 * df;
        if (f - expect).abs() > GRID_TOLERANCE * df {
            return Err(BemError::NonUniformGrid(format!("frequency {i} is {f} Hz, expected {expect} Hz")));
        }
    }

    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(taps);
    let shift = taps / 4;
    let mut data = Vec::with_capacity(set.directions.len() * set.ears.len() * taps);
    let mut buf = vec![Complex64::new(0.0, 0.0); taps];
    for d in 0..set.directions.len() {
        for e in 0..set.ears.len() {
            let h = set.spectrum(d, e);
            buf.fill(Complex64::new(0.0, 0.0));
            buf[0] = Complex64::new(h[0].norm(), 0.0);
            for (k, v) in h.iter().enumerate().map(|(i, v)| (i + 1, v)) {
                if k == half {
                    buf[k] = Complex64::new(v.re, 0.0);
                } else {
                    buf[k] = *v;
                    buf[taps - k] = v.conj();
                }
            }
            ifft.process(&mut buf);
            let mut out = vec![0.0; taps];
            for (n, v) in buf.iter().enumerate() {
                out[(n + shift) % taps] = v.re / taps as f64;
            }
            data.extend(out);
        }
    }
    let mut result = set.clone();
    result.impulse = Some(ImpulseResponses { sample_rate, taps, data });
    Ok(result)
}
