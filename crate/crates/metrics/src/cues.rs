//! Interaural time and level differences.

use hrtf_bem::{Ear, HrtfSet};
use serde::{Deserialize, Serialize};

use crate::error::{MetricsError, Result};

/// Default ITD low-pass cutoff, Hz.
pub const DEFAULT_LOWPASS_HZ: f64 = 3000.0;
/// Cross-correlation lags searched: ± this many seconds.
pub const ITD_WINDOW_S: f64 = 1e-3;
/// Fraction of the per-ear peak that marks an onset.
pub const ONSET_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItdMethod {
    CrossCorrelation,
    ThresholdOnset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItdEstimate {
    /// Positive when the left ear leads.
    pub seconds: f64,
    /// False when the correlation peak sits at the edge of the lag window.
    pub reliable: bool,
}

/// Per-direction interaural cues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueTable {
    pub itd: Vec<ItdEstimate>,
    /// Positive when the left ear is louder.
    pub ild_db: Vec<f64>,
    pub itd_method: ItdMethod,
    pub lowpass_hz: f64,
    /// Hz.
    pub ild_band: (f64, f64),
}

fn ear_pair(set: &HrtfSet) -> Result<(usize, usize)> {
    let l = set.ear_index(Ear::Left).ok_or(MetricsError::MissingEar("left"))?;
    let r = set.ear_index(Ear::Right).ok_or(MetricsError::MissingEar("right"))?;
    Ok((l, r))
}

/// Biquad coefficients `[b0, b1, b2, a1, a2]` (a0 = 1).
type Biquad = [f64; 5];

/// Fourth-order Butterworth low-pass as two bilinear-transform sections.
fn butterworth4(cutoff: f64, sample_rate: f64) -> [Biquad; 2] {
    let w0 = 2.0 * std::f64::consts::PI * cutoff / sample_rate;
    let (sin, cos) = w0.sin_cos();
    let section = |q: f64| {
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b1 = (1.0 - cos) / a0;
        [b1 / 2.0, b1, b1 / 2.0, -2.0 * cos / a0, (1.0 - alpha) / a0]
    };
    let pi = std::f64::consts::PI;
    [section(1.0 / (2.0 * (pi / 8.0).cos())), section(1.0 / (2.0 * (3.0 * pi / 8.0).cos()))]
}

fn run(x: &mut [f64], s: &Biquad) {
    let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
    for v in x.iter_mut() {
        let y = s[0] * *v + s[1] * x1 + s[2] * x2 - s[3] * y1 - s[4] * y2;
        x2 = x1;
        x1 = *v;
        y2 = y1;
        y1 = y;
        *v = y;
    }
}

/// Zero-phase low-pass: forward and backward passes over a zero-padded copy.
pub fn lowpass_zero_phase(x: &[f64], cutoff: f64, sample_rate: f64) -> Result<Vec<f64>> {
    if !(cutoff > 0.0 && cutoff < 0.5 * sample_rate) {
        return Err(MetricsError::InvalidParameter(format!(
            "low-pass cutoff {cutoff} Hz must lie in (0, {}) Hz",
            0.5 * sample_rate
        )));
    }
    let pad = x.len();
    let mut buf = vec![0.0; pad];
    buf.extend_from_slice(x);
    buf.extend(std::iter::repeat_n(0.0, pad));
    let sections = butterworth4(cutoff, sample_rate);
    for s in &sections {
        run(&mut buf, s);
    }
    buf.reverse();
    for s in &sections {
        run(&mut buf, s);
    }
    buf.reverse();
    Ok(buf[pad..pad + x.len()].to_vec())
}

/// ITD for every direction.
pub fn itd(set: &HrtfSet, method: ItdMethod, lowpass_hz: f64) -> Result<Vec<ItdEstimate>> {
    let (l, r) = ear_pair(set)?;
    let fs = set.impulse.as_ref().ok_or(MetricsError::MissingImpulse)?.sample_rate;
    (0..set.directions.len())
        .map(|d| {
            let left = set.impulse_response(d, l).expect("impulse present");
            let right = set.impulse_response(d, r).expect("impulse present");
            match method {
                ItdMethod::CrossCorrelation => {
                    let left = lowpass_zero_phase(left, lowpass_hz, fs)?;
                    let right = lowpass_zero_phase(right, lowpass_hz, fs)?;
                    Ok(cross_correlation_delay(&left, &right, fs))
                }
                ItdMethod::ThresholdOnset => {
                    let (a, b) = (onset(left), onset(right));
                    match (a, b) {
                        (Some(a), Some(b)) => Ok(ItdEstimate { seconds: (b as f64 - a as f64) / fs, reliable: true }),
                        _ => Err(MetricsError::ZeroEnergy { direction: d }),
                    }
                }
            }
        })
        .collect()
}

/// Lag of `right` relative to `left` maximizing `Σ left[n]·right[n + lag]`.
fn cross_correlation_delay(left: &[f64], right: &[f64], fs: f64) -> ItdEstimate {
    let n = left.len() as isize;
    let window = ((ITD_WINDOW_S * fs).ceil() as isize).min(n - 1);
    let corr = |lag: isize| -> f64 {
        (0..n)
            .filter(|&i| i + lag >= 0 && i + lag < n)
            .map(|i| left[i as usize] * right[(i + lag) as usize])
            .sum()
    };
    let values: Vec<f64> = (-window..=window).map(corr).collect();
    let best = (0..values.len()).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let lag = best as isize - window;
    let edge = best == 0 || best + 1 == values.len();
    let offset = if edge {
        0.0
    } else {
        let (a, b, c) = (values[best - 1], values[best], values[best + 1]);
        let den = a - 2.0 * b + c;
        if den == 0.0 { 0.0 } else { 0.5 * (a - c) / den }
    };
    ItdEstimate {
        seconds: (lag as f64 + offset) / fs,
        reliable: !edge,
    }
}

fn onset(h: &[f64]) -> Option<usize> {
    let peak = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return None;
    }
    h.iter().position(|v| v.abs() >= ONSET_FRACTION * peak)
}

/// Energy ratio of the ears over bins in `[f_lo, f_hi]`, dB.
pub fn ild(set: &HrtfSet, f_lo: f64, f_hi: f64) -> Result<Vec<f64>> {
    let (l, r) = ear_pair(set)?;
    if !(f_lo < f_hi) {
        return Err(MetricsError::InvalidBand(format!("{f_lo} Hz is not below {f_hi} Hz")));
    }
    let bins: Vec<usize> = (0..set.frequencies.len())
        .filter(|&i| set.frequencies[i] >= f_lo && set.frequencies[i] <= f_hi)
        .collect();
    if bins.is_empty() {
        return Err(MetricsError::InvalidBand(format!("no frequencies in [{f_lo}, {f_hi}] Hz")));
    }
    (0..set.directions.len())
        .map(|d| {
            let (hl, hr) = (set.spectrum(d, l), set.spectrum(d, r));
            let el: f64 = bins.iter().map(|&i| hl[i].norm_sqr()).sum();
            let er: f64 = bins.iter().map(|&i| hr[i].norm_sqr()).sum();
            if el == 0.0 || er == 0.0 {
                return Err(MetricsError::ZeroEnergy { direction: d });
            }
            Ok(10.0 * (el / er).log10())
        })
        .collect()
}

pub fn cue_table(set: &HrtfSet, method: ItdMethod, lowpass_hz: f64, ild_band: (f64, f64)) -> Result<CueTable> {
    Ok(CueTable {
        itd: itd(set, method, lowpass_hz)?,
        ild_db: ild(set, ild_band.0, ild_band.1)?,
        itd_method: method,
        lowpass_hz,
        ild_band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hrtf_bem::{Complex64, GridPoint, ImpulseResponses};

    fn pulse(n: usize, at: usize) -> Vec<f64> {
        // Smooth band-limited click.
        (0..n).map(|i| (-((i as f64 - at as f64) / 3.0).powi(2)).exp()).collect()
    }

    fn with_impulses(pairs: Vec<(Vec<f64>, Vec<f64>)>, fs: f64) -> HrtfSet {
        let taps = pairs[0].0.len();
        let dirs = (0..pairs.len()).map(|i| GridPoint { az: i as f64, el: 0.0, r: 1.0 }).collect();
        let values = vec![Complex64::new(1.0, 0.0); pairs.len() * 2];
        let mut set = HrtfSet::new(dirs, vec![1000.0], vec![Ear::Left, Ear::Right], values).unwrap();
        let data = pairs.into_iter().flat_map(|(l, r)| l.into_iter().chain(r)).collect();
        set.impulse = Some(ImpulseResponses { sample_rate: fs, taps, data });
        set
    }

    #[test]
    fn identical_ears_give_zero_itd() {
        let set = with_impulses(vec![(pulse(128, 40), pulse(128, 40))], 48000.0);
        for m in [ItdMethod::CrossCorrelation, ItdMethod::ThresholdOnset] {
            let t = itd(&set, m, 3000.0).unwrap();
            assert_eq!(t[0].seconds, 0.0);
            assert!(t[0].reliable);
        }
    }

    #[test]
    fn ten_sample_delay_at_48k() {
        let set = with_impulses(vec![(pulse(256, 60), pulse(256, 70)), (pulse(256, 70), pulse(256, 60))], 48000.0);
        let expect: f64 = 10.0 / 48000.0;
        assert!((expect * 1e6 - 208.33).abs() < 0.01);
        for m in [ItdMethod::CrossCorrelation, ItdMethod::ThresholdOnset] {
            let t = itd(&set, m, 3000.0).unwrap();
            assert!((t[0].seconds - expect).abs() < 1e-9, "{m:?}: {}", t[0].seconds);
            assert!((t[1].seconds + expect).abs() < 1e-9, "{m:?}: {}", t[1].seconds);
        }
    }

    #[test]
    fn fractional_delay_is_interpolated() {
        // 2.5-sample shift of a smooth pulse; parabolic interpolation lands within a tenth of a sample.
        let l: Vec<f64> = (0..128).map(|i| (-((i as f64 - 50.0) / 6.0).powi(2)).exp()).collect();
        let r: Vec<f64> = (0..128).map(|i| (-((i as f64 - 52.5) / 6.0).powi(2)).exp()).collect();
        let set = with_impulses(vec![(l, r)], 16000.0);
        let t = itd(&set, ItdMethod::CrossCorrelation, 3000.0).unwrap()[0];
        assert!((t.seconds * 16000.0 - 2.5).abs() < 0.1, "{}", t.seconds * 16000.0);
    }

    #[test]
    fn peak_at_window_edge_is_unreliable() {
        let fs = 8000.0;
        // 30 samples apart, beyond the ±8-sample window.
        let set = with_impulses(vec![(pulse(128, 20), pulse(128, 50))], fs);
        let t = itd(&set, ItdMethod::CrossCorrelation, 3000.0).unwrap()[0];
        assert!(!t.reliable);
    }

    #[test]
    fn lowpass_is_zero_phase_and_rejects_bad_cutoff() {
        let x = pulse(200, 100);
        let y = lowpass_zero_phase(&x, 3000.0, 48000.0).unwrap();
        let peak = (0..200).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
        assert_eq!(peak, 100);
        for i in 1..60 {
            assert!((y[100 - i] - y[100 + i]).abs() < 1e-12);
        }
        // DC gain one, Nyquist tone removed.
        let dc = lowpass_zero_phase(&vec![1.0; 2000], 3000.0, 48000.0).unwrap();
        assert!((dc[1000] - 1.0).abs() < 1e-9);
        let nyq: Vec<f64> = (0..2000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(lowpass_zero_phase(&nyq, 3000.0, 48000.0).unwrap()[1000].abs() < 1e-9);
        assert!(lowpass_zero_phase(&x, 30000.0, 48000.0).is_err());
    }

    #[test]
    fn missing_impulses_rejected() {
        let set = HrtfSet::new(vec![GridPoint { az: 0.0, el: 0.0, r: 1.0 }], vec![100.0], vec![Ear::Left, Ear::Right], vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        assert!(matches!(itd(&set, ItdMethod::CrossCorrelation, 3000.0), Err(MetricsError::MissingImpulse)));
    }

    fn spectra(l: impl Fn(usize) -> Complex64, r: impl Fn(usize) -> Complex64) -> HrtfSet {
        let freqs: Vec<f64> = (1..=10).map(|i| 1000.0 * i as f64).collect();
        let values = (0..10).map(&l).chain((0..10).map(&r)).collect();
        HrtfSet::new(vec![GridPoint { az: 0.0, el: 0.0, r: 1.0 }], freqs, vec![Ear::Left, Ear::Right], values).unwrap()
    }

    #[test]
    fn ild_identities() {
        let h = |f: usize| Complex64::from_polar(1.0 + 0.1 * f as f64, f as f64);
        assert_eq!(ild(&spectra(h, h), 200.0, 15000.0).unwrap()[0], 0.0);
        let g = ild(&spectra(|f| h(f) * 2.0, h), 200.0, 15000.0).unwrap()[0];
        assert!((g - 6.0206).abs() < 1e-4);
        let scaled = ild(&spectra(|f| h(f) * 6.0, |f| h(f) * 3.0), 200.0, 15000.0).unwrap()[0];
        assert!((scaled - g).abs() < 1e-12);
        let zero = spectra(|_| Complex64::new(0.0, 0.0), h);
        assert!(matches!(ild(&zero, 200.0, 15000.0), Err(MetricsError::ZeroEnergy { direction: 0 })));
        assert!(matches!(ild(&zero, 15000.0, 20000.0), Err(MetricsError::InvalidBand(_))));
    }
}
