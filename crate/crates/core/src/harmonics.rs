//! Synchronous demodulation of dq-frame waveforms against the electrical
//! angle.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::imbalance::SecondHarmonicPhasor;
use crate::linalg;

/// Fewest samples per electrical period accepted by [`demodulate`].
pub const MIN_SAMPLES_PER_PERIOD: f64 = 64.0;

/// `signal ≈ dc + k·cos(2θ + φ)`
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HarmonicDecomposition {
    pub dc: f64,
    pub second: SecondHarmonicPhasor,
    pub residual_rms: f64,
}

impl HarmonicDecomposition {
    pub fn eval(&self, theta: f64) -> f64 {
        self.dc + self.second.cos2(theta)
    }
}

/// Electrical periods spanned by the samples, counting the last sample's
/// interval.
pub(crate) fn periods_covered(theta: &[f64]) -> f64 {
    let n = theta.len();
    if n < 2 {
        return 0.0;
    }
    let span = (theta[n - 1] - theta[0]).abs();
    span * n as f64 / (n - 1) as f64 / (2.0 * PI)
}

pub(crate) fn check_coverage(theta: &[f64], min_per_period: f64) -> Result<f64> {
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::Input("angle samples must be finite".into()));
    }
    let periods = periods_covered(theta);
    // A uniformly sampled single period spans 2π·(n−1)/n; allow rounding.
    if periods < 1.0 - 1e-9 {
        return Err(Error::Input(format!(
            "samples cover {periods:.3} electrical periods, at least 1 required"
        )));
    }
    let per_period = theta.len() as f64 / periods;
    if per_period < min_per_period {
        return Err(Error::Input(format!(
            "{per_period:.1} samples per electrical period, at least {min_per_period} required"
        )));
    }
    Ok(periods)
}

/// Least-squares projection of `signal` onto `{1, cos 2θ, sin 2θ}`.
pub fn demodulate(signal: &[f64], theta: &[f64]) -> Result<HarmonicDecomposition> {
    if signal.len() != theta.len() {
        return Err(Error::Input(format!(
            "signal has {} samples but angle has {}",
            signal.len(),
            theta.len()
        )));
    }
    check_coverage(theta, MIN_SAMPLES_PER_PERIOD)?;
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("signal samples must be finite".into()));
    }

    let mut gram = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (&y, &th) in signal.iter().zip(theta) {
        let (s, c) = (2.0 * th).sin_cos();
        let basis = [1.0, c, s];
        for i in 0..3 {
            rhs[i] += basis[i] * y;
            for j in 0..3 {
                gram[i][j] += basis[i] * basis[j];
            }
        }
    }
    let [dc, a, b] = linalg::solve_spd3(&gram, rhs)
        .ok_or_else(|| Error::Input("angle samples do not span the harmonic basis".into()))?;

    // a cos 2θ + b sin 2θ = k cos(2θ + φ) with k e^{jφ} = a − j b
    let scale = signal.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let threshold = 1e-12 * scale;
    let mut second = SecondHarmonicPhasor::from_rect(a, -b, 0.0);
    if second.k < threshold {
        second.phi = 0.0;
    }

    let mut sq = 0.0;
    for (&y, &th) in signal.iter().zip(theta) {
        let (s, c) = (2.0 * th).sin_cos();
        let r = y - (dc + a * c + b * s);
        sq += r * r;
    }
    Ok(HarmonicDecomposition {
        dc,
        second,
        residual_rms: (sq / signal.len() as f64).sqrt(),
    })
}

/// Error metrics of `b` against the reference `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformError {
    pub max_abs_error: f64,
    pub rms_error: f64,
    /// `rms_error / rms(a)`; `None` when the reference is identically zero.
    pub relative_rms: Option<f64>,
}

pub fn compare_waveforms(a: &[f64], b: &[f64]) -> Result<WaveformError> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "waveform lengths differ ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Input("waveforms are empty".into()));
    }
    let n = a.len() as f64;
    let mut max_abs: f64 = 0.0;
    let mut sq_err = 0.0;
    let mut sq_ref = 0.0;
    for (x, y) in a.iter().zip(b) {
        let e = y - x;
        max_abs = max_abs.max(e.abs());
        sq_err += e * e;
        sq_ref += x * x;
    }
    let rms_error = (sq_err / n).sqrt();
    let rms_ref = (sq_ref / n).sqrt();
    Ok(WaveformError {
        max_abs_error: max_abs,
        rms_error,
        relative_rms: (rms_ref > 0.0).then(|| rms_error / rms_ref),
    })
}
