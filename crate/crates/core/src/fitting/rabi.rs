//! Nutation frequency from the spectrum of a Rabi oscillation.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};

/// Zero-padding factor of the transform.
pub const RABI_PADDING: usize = 4;

/// Dominant frequency of a uniformly sampled signal, in cycles per unit of
/// `t` (MHz for µs).
///
/// The mean is removed, the record is zero-padded to four times its length
/// and the magnitude peak is refined by a parabola through the three
/// highest bins.
pub fn rabi_peak(t: &[f64], y: &[f64]) -> Result<f64> {
    if t.len() != y.len() {
        return invalid(format!("{} times but {} samples", t.len(), y.len()));
    }
    let n = t.len();
    if n < 16 {
        return invalid(format!("need at least 16 samples, got {n}"));
    }
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return invalid("samples must be uniformly spaced in time");
    }
    if y.iter().any(|v| !v.is_finite()) {
        return invalid("signal contains non-finite values");
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let len = RABI_PADDING * n;
    let mut buf: Vec<Complex<f64>> = y.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..=len / 2].iter().map(|c| c.norm()).collect();
    let (k, &peak) = mag[1..].iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, v)| (i + 1, v)).unwrap();
    let scale = mag.iter().cloned().fold(0.0, f64::max);
    if !(peak > 1e-12 * y.iter().map(|v| v.abs()).fold(0.0, f64::max) * n as f64) || scale == 0.0 {
        return Err(Error::Domain("signal has no oscillating component".into()));
    }
    let offset = if k + 1 < mag.len() {
        let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
        let den = a - 2.0 * b + c;
        if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 }
    } else {
        0.0
    };
    Ok((k as f64 + offset) / (len as f64 * dt))
}
