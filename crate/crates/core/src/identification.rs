//! Recovery of per-phase deviations from measured dq voltage deviations,
//! one imbalance family at a time.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics;
use crate::imbalance::{flux_delta, inductance_delta, resistance_delta, SecondHarmonicPhasor};
use crate::linalg;
use crate::machine::{decompose, MachineParameters, NonSalientDq, OperatingPoint};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImbalanceFamily {
    Resistance,
    Flux,
}

impl ImbalanceFamily {
    pub fn name(self) -> &'static str {
        match self {
            ImbalanceFamily::Resistance => "resistance",
            ImbalanceFamily::Flux => "flux",
        }
    }
}

/// Per-phase deviations recovered from a `(sum, phasor)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvertedDeviations {
    /// Deviations shifted so the smallest is zero.
    pub per_phase: [f64; 3],
    /// Amount subtracted from every phase; add it back to recover the
    /// unshifted triple.
    pub shift: f64,
}

/// Inverse of the `(Σ, K e^{jφ})` map of a deviation triple:
///
/// ```text
/// Δa = S/3 + 2·Re
/// Δb = S/3 − Re + √3·Im
/// Δc = S/3 − Re − √3·Im
/// ```
pub fn invert_phasor(s: f64, phasor: SecondHarmonicPhasor) -> InvertedDeviations {
    let (re, im) = (phasor.re(), phasor.im());
    let base = s / 3.0;
    let raw = [
        base + 2.0 * re,
        base - re + SQRT3 * im,
        base - re - SQRT3 * im,
    ];
    let shift = raw[0].min(raw[1]).min(raw[2]);
    InvertedDeviations {
        per_phase: raw.map(|v| (v - shift).max(0.0)),
        shift,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentificationResult {
    pub family: ImbalanceFamily,
    /// Sum of `per_phase` (Ω or Wb).
    pub s: f64,
    pub phasor: SecondHarmonicPhasor,
    /// Deviations above the smallest phase.
    pub per_phase: [f64; 3],
    /// Common offset removed to reach the min-as-nominal form; non-zero when
    /// the nominal used to form the voltage deviations was not the smallest
    /// phase value.
    pub nominal_shift: f64,
    /// RMS of the stacked d/q fit residual (V).
    pub fit_residual_rms: f64,
}

impl IdentificationResult {
    /// Deviations relative to the nominal used to build the input data.
    pub fn unshifted(&self) -> [f64; 3] {
        self.per_phase.map(|d| d + self.nominal_shift)
    }
}

/// Stacked least squares for `(S, Re, Im)` with rows `[g_S, g_re, g_im]`.
struct Normal {
    gram: [[f64; 3]; 3],
    rhs: [f64; 3],
    rows: Vec<([f64; 3], f64)>,
}

impl Normal {
    fn new(capacity: usize) -> Self {
        Self {
            gram: [[0.0; 3]; 3],
            rhs: [0.0; 3],
            rows: Vec::with_capacity(capacity),
        }
    }

    fn push(&mut self, g: [f64; 3], y: f64) {
        for i in 0..3 {
            self.rhs[i] += g[i] * y;
            for j in 0..3 {
                self.gram[i][j] += g[i] * g[j];
            }
        }
        self.rows.push((g, y));
    }

    fn solve(&self) -> Option<([f64; 3], f64)> {
        let x = linalg::solve_spd3(&self.gram, self.rhs)?;
        let sq: f64 = self
            .rows
            .iter()
            .map(|(g, y)| {
                let r = y - (g[0] * x[0] + g[1] * x[1] + g[2] * x[2]);
                r * r
            })
            .sum();
        Some((x, (sq / self.rows.len().max(1) as f64).sqrt()))
    }
}

fn check_samples(dv_d: &[f64], dv_q: &[f64], theta: &[f64]) -> Result<()> {
    if dv_d.len() != theta.len() || dv_q.len() != theta.len() {
        return Err(Error::Input(format!(
            "sample counts differ (d: {}, q: {}, θ: {})",
            dv_d.len(),
            dv_q.len(),
            theta.len()
        )));
    }
    if dv_d.iter().chain(dv_q).any(|v| !v.is_finite()) {
        return Err(Error::Input("voltage samples must be finite".into()));
    }
    harmonics::check_coverage(theta, 3.0).map(|_| ())
}

fn finish(family: ImbalanceFamily, x: [f64; 3], residual: f64) -> IdentificationResult {
    let [s, re, im] = x;
    let phasor = SecondHarmonicPhasor::from_rect(re, im, s.abs().max(re.hypot(im)));
    let inv = invert_phasor(s, phasor);
    IdentificationResult {
        family,
        s: inv.per_phase.iter().sum(),
        phasor,
        per_phase: inv.per_phase,
        nominal_shift: inv.shift,
        fit_residual_rms: residual,
    }
}

/// Fits resistance deviations to dq voltage deviations measured at constant
/// currents `(i_d, i_q)` with no zero-sequence current.
///
/// Model, with `P = Re + j·Im = K e^{jφ}`:
///
/// ```text
/// ΔV_d = S/3·i_d + Re·(i_d cos 2θ + i_q sin 2θ) + Im·(i_q cos 2θ − i_d sin 2θ)
/// ΔV_q = S/3·i_q + Re·(i_d sin 2θ − i_q cos 2θ) + Im·(i_d cos 2θ + i_q sin 2θ)
/// ```
pub fn fit_resistance(
    dv_d: &[f64],
    dv_q: &[f64],
    i_d: f64,
    i_q: f64,
    theta: &[f64],
) -> Result<IdentificationResult> {
    check_samples(dv_d, dv_q, theta)?;
    if !(i_d.is_finite() && i_q.is_finite()) || (i_d == 0.0 && i_q == 0.0) {
        return Err(Error::Identifiability(
            "resistance imbalance is invisible without current".into(),
        ));
    }
    let mut ne = Normal::new(2 * theta.len());
    for k in 0..theta.len() {
        let (s2, c2) = (2.0 * theta[k]).sin_cos();
        ne.push(
            [i_d / 3.0, i_d * c2 + i_q * s2, i_q * c2 - i_d * s2],
            dv_d[k],
        );
        ne.push(
            [i_q / 3.0, i_d * s2 - i_q * c2, i_d * c2 + i_q * s2],
            dv_q[k],
        );
    }
    let (x, residual) = ne
        .solve()
        .ok_or_else(|| Error::Identifiability("resistance fit is rank deficient".into()))?;
    Ok(finish(ImbalanceFamily::Resistance, x, residual))
}

/// Fits magnet flux-linkage deviations to dq voltage deviations at speed
/// `omega_e`:
///
/// ```text
/// ΔV_d = ω (Re sin 2θ + Im cos 2θ)
/// ΔV_q = ω (S/3 − Re cos 2θ + Im sin 2θ)
/// ```
pub fn fit_flux(
    dv_d: &[f64],
    dv_q: &[f64],
    omega_e: f64,
    theta: &[f64],
) -> Result<IdentificationResult> {
    check_samples(dv_d, dv_q, theta)?;
    if omega_e == 0.0 || !omega_e.is_finite() {
        return Err(Error::Identifiability(
            "flux-linkage imbalance is invisible at standstill".into(),
        ));
    }
    let w = omega_e;
    let mut ne = Normal::new(2 * theta.len());
    for k in 0..theta.len() {
        let (s2, c2) = (2.0 * theta[k]).sin_cos();
        ne.push([0.0, w * s2, w * c2], dv_d[k]);
        ne.push([w / 3.0, -w * c2, w * s2], dv_q[k]);
    }
    let (x, residual) = ne
        .solve()
        .ok_or_else(|| Error::Identifiability("flux fit is rank deficient".into()))?;
    Ok(finish(ImbalanceFamily::Flux, x, residual))
}

/// First-order second-harmonic current ripple of a voltage-fed machine.
///
/// `dv_d`/`dv_q` are the `2θ` components of the imbalance voltage evaluated
/// at the steady operating current. Linearising the dq model around that
/// point, the ripple `ΔI = Re(X e^{j2θ})` solves
///
/// ```text
/// [R + j2ωL   ωL      ] [X_d]     [A_d]
/// [−ωL        R + j2ωL] [X_q] = − [A_q]
/// ```
///
/// Returns the `(d, q)` current phasors in the same `k cos(2θ + φ)` form.
pub fn predict_current_ripple(
    machine: &NonSalientDq,
    omega_e: f64,
    dv_d: SecondHarmonicPhasor,
    dv_q: SecondHarmonicPhasor,
) -> (SecondHarmonicPhasor, SecondHarmonicPhasor) {
    let a_d = Complex64::from_polar(dv_d.k, dv_d.phi);
    let a_q = Complex64::from_polar(dv_q.k, dv_q.phi);
    let x = omega_e * machine.l_plus_m;
    let z = Complex64::new(machine.r, 2.0 * x);
    // [z  x; −x  z]⁻¹ = [z  −x; x  z] / (z² + x²)
    let det = z * z + x * x;
    let x_d = -(z * a_d - x * a_q) / det;
    let x_q = -(x * a_d + z * a_q) / det;
    let to_phasor = |c: Complex64| SecondHarmonicPhasor::from_rect(c.re, c.im, 0.0);
    (to_phasor(x_d), to_phasor(x_q))
}

/// `2θ` components of the imbalance voltage at constant dq currents.
pub fn steady_ripple_forcing(
    params: &MachineParameters,
    omega_e: f64,
    i_d: f64,
    i_q: f64,
) -> (SecondHarmonicPhasor, SecondHarmonicPhasor) {
    // the deltas are trigonometric polynomials of degree two in θ, so a
    // uniform grid over one period demodulates them exactly
    const N: usize = 64;
    let dec = decompose(params);
    let theta: Vec<f64> = (0..N)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / N as f64)
        .collect();
    let (mut dv_d, mut dv_q) = (Vec::with_capacity(N), Vec::with_capacity(N));
    for &th in &theta {
        let op = OperatingPoint::steady(th, omega_e, i_d, i_q);
        let dv = resistance_delta(dec.d_r, &op)
            + flux_delta(dec.d_lam, omega_e, th)
            + inductance_delta(dec.d_l, dec.d_m, &op);
        dv_d.push(dv.dv_d);
        dv_q.push(dv.dv_q);
    }
    let second = |v: &[f64]| {
        harmonics::demodulate(v, &theta)
            .map(|h| h.second)
            .unwrap_or(SecondHarmonicPhasor { k: 0.0, phi: 0.0 })
    };
    (second(&dv_d), second(&dv_q))
}

/// Steady current and first-order `2θ` current ripple of a voltage-fed
/// machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipplePrediction {
    pub i_d: f64,
    pub i_q: f64,
    pub ripple_d: SecondHarmonicPhasor,
    pub ripple_q: SecondHarmonicPhasor,
}

/// Linearises around the per-family mean machine.
pub fn predict_steady_ripple(
    params: &MachineParameters,
    v_dq: (f64, f64),
    omega_e: f64,
) -> RipplePrediction {
    let mean = params.mean_dq();
    let (i_d, i_q) = mean.steady_state_current(v_dq.0, v_dq.1, omega_e);
    let (a_d, a_q) = steady_ripple_forcing(params, omega_e, i_d, i_q);
    let (ripple_d, ripple_q) = predict_current_ripple(&mean, omega_e, a_d, a_q);
    RipplePrediction {
        i_d,
        i_q,
        ripple_d,
        ripple_q,
    }
}
