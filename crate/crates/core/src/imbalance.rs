//! Closed-form dq-frame voltage deviations caused by per-phase parameter
//! imbalance.
//!
//! Every deviation triple `(Δ_a, Δ_b, Δ_c)` splits into a common part
//! `S = Δ_a + Δ_b + Δ_c`, which only rescales the ideal model, and a
//! second-harmonic phasor
//!
//! ```text
//! K·e^{jφ} = (1/3)·(Δ_a + Δ_b·e^{j2π/3} + Δ_c·e^{-j2π/3})
//! ```
//!
//! so that `K = (1/3)·sqrt(ΣΔ² − Σ cross products)` and
//! `φ = atan2(√3(Δ_b − Δ_c), 2Δ_a − Δ_b − Δ_c)`. With this phase the
//! resistance, flux and self-inductance terms read `K cos(2θ + φ)` on the
//! d axis. Mutual deviations use the same construction on `(ΔM_bc, ΔM_ca,
//! ΔM_ab)` with a `2/3` prefactor.
//!
//! Zero-sequence current couples through the conjugate phasor at `1θ`
//! (`2K cos(θ − φ) i_0` for resistance).

use std::f64::consts::PI;
use std::ops::Add;

use crate::machine::OperatingPoint;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Magnitude and phase of a `k·cos(2θ + φ)` component.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SecondHarmonicPhasor {
    pub k: f64,
    /// Phase in `(−π, π]`; zero when `k` is negligible.
    pub phi: f64,
}

impl SecondHarmonicPhasor {
    /// Relative magnitude below which the phase is reported as zero.
    pub const DEGENERATE: f64 = 1e-15;

    /// Builds the phasor `re + j·im`, forcing `phi = 0` when its magnitude is
    /// below `DEGENERATE · scale`.
    pub fn from_rect(re: f64, im: f64, scale: f64) -> Self {
        let k = re.hypot(im);
        if k <= Self::DEGENERATE * scale.abs() || k == 0.0 {
            return Self { k, phi: 0.0 };
        }
        Self {
            k,
            phi: wrap_phase(im.atan2(re)),
        }
    }

    pub fn re(&self) -> f64 {
        self.k * self.phi.cos()
    }

    pub fn im(&self) -> f64 {
        self.k * self.phi.sin()
    }

    /// `k·cos(2θ + φ)`
    pub fn cos2(&self, theta: f64) -> f64 {
        self.k * (2.0 * theta + self.phi).cos()
    }

    /// `k·sin(2θ + φ)`
    pub fn sin2(&self, theta: f64) -> f64 {
        self.k * (2.0 * theta + self.phi).sin()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        if factor >= 0.0 {
            Self {
                k: self.k * factor,
                phi: self.phi,
            }
        } else {
            Self {
                k: -self.k * factor,
                phi: wrap_phase(self.phi + PI),
            }
        }
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Second-harmonic phasor of a per-phase deviation triple, before the
/// family-specific prefactor: `(1/3)·(Δ_a + Δ_b e^{j2π/3} + Δ_c e^{-j2π/3})`.
fn triple_phasor(d: [f64; 3]) -> SecondHarmonicPhasor {
    let re = (d[0] - 0.5 * (d[1] + d[2])) / 3.0;
    let im = SQRT3_2 * (d[1] - d[2]) / 3.0;
    let scale = d.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    SecondHarmonicPhasor::from_rect(re, im, scale)
}

/// Resistance imbalance phasor `(K_R, φ_R)`.
pub fn resistance_coeffs(d_r: [f64; 3]) -> SecondHarmonicPhasor {
    triple_phasor(d_r)
}

/// Magnet flux-linkage imbalance phasor `(K_λ, φ_λ)`.
pub fn flux_coeffs(d_lam: [f64; 3]) -> SecondHarmonicPhasor {
    triple_phasor(d_lam)
}

/// Self- and mutual-inductance imbalance phasors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InductanceCoeffs {
    pub self_l: SecondHarmonicPhasor,
    pub mutual: SecondHarmonicPhasor,
}

/// `d_m` is ordered `(ΔM_ab, ΔM_bc, ΔM_ca)`.
pub fn inductance_coeffs(d_l: [f64; 3], d_m: [f64; 3]) -> InductanceCoeffs {
    let [m_ab, m_bc, m_ca] = d_m;
    // The pair opposite a phase plays the role of that phase's entry.
    let m = triple_phasor([m_bc, m_ca, m_ab]);
    InductanceCoeffs {
        self_l: triple_phasor(d_l),
        mutual: SecondHarmonicPhasor {
            k: 2.0 * m.k,
            phi: m.phi,
        },
    }
}

/// Additional d- and q-axis voltages (V).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DqVoltageDelta {
    pub dv_d: f64,
    pub dv_q: f64,
}

impl DqVoltageDelta {
    pub const ZERO: Self = Self {
        dv_d: 0.0,
        dv_q: 0.0,
    };
}

impl Add for DqVoltageDelta {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            dv_d: self.dv_d + rhs.dv_d,
            dv_q: self.dv_q + rhs.dv_q,
        }
    }
}

/// Position-dependent 2×3 gain mapping `(u_d, u_q, u_0)` to the dq voltage
/// deviation of a diagonal per-phase deviation `diag(Δ)`.
fn diagonal_gain(sum: f64, p: &SecondHarmonicPhasor, theta: f64, u: [f64; 3]) -> DqVoltageDelta {
    let c2 = p.cos2(theta);
    let s2 = p.sin2(theta);
    let c1 = p.k * (theta - p.phi).cos();
    let s1 = p.k * (theta - p.phi).sin();
    let dc = sum / 3.0;
    DqVoltageDelta {
        dv_d: (dc + c2) * u[0] + s2 * u[1] + 2.0 * c1 * u[2],
        dv_q: s2 * u[0] + (dc - c2) * u[1] + 2.0 * s1 * u[2],
    }
}

/// Voltage deviation from resistance imbalance, including the zero-sequence
/// current term.
pub fn resistance_delta(d_r: [f64; 3], op: &OperatingPoint) -> DqVoltageDelta {
    let p = resistance_coeffs(d_r);
    let sum = d_r.iter().sum::<f64>();
    diagonal_gain(sum, &p, op.theta, [op.i_d, op.i_q, op.i_0])
}

/// Voltage deviation from magnet flux-linkage imbalance (back-EMF only).
pub fn flux_delta(d_lam: [f64; 3], omega_e: f64, theta: f64) -> DqVoltageDelta {
    let p = flux_coeffs(d_lam);
    let sum = d_lam.iter().sum::<f64>();
    DqVoltageDelta {
        dv_d: omega_e * p.sin2(theta),
        dv_q: omega_e * (sum / 3.0 - p.cos2(theta)),
    }
}

/// Voltage deviation from self- and mutual-inductance imbalance of a
/// non-salient machine.
///
/// The voltages act on `u_d = di_d/dt + ω i_q`, `u_q = di_q/dt − ω i_d` and
/// `u_0 = di_0/dt`. Self deviations share the resistance structure; mutual
/// deviations enter with the opposite sign on the d diagonal and the
/// off-diagonal, and with the same sign on the q diagonal.
pub fn inductance_delta(d_l: [f64; 3], d_m: [f64; 3], op: &OperatingPoint) -> DqVoltageDelta {
    let coeffs = inductance_coeffs(d_l, d_m);
    let u = [
        op.di_d + op.omega_e * op.i_q,
        op.di_q - op.omega_e * op.i_d,
        op.di_0,
    ];
    let theta = op.theta;
    let self_part = diagonal_gain(d_l.iter().sum(), &coeffs.self_l, theta, u);

    let m = &coeffs.mutual;
    let (c2, s2) = (m.cos2(theta), m.sin2(theta));
    let (c1, s1) = (m.k * (theta - m.phi).cos(), m.k * (theta - m.phi).sin());
    let dc = d_m.iter().sum::<f64>() / 3.0;
    let mutual_part = DqVoltageDelta {
        dv_d: (dc - c2) * u[0] - s2 * u[1] + c1 * u[2],
        dv_q: -s2 * u[0] + (dc + c2) * u[1] + s1 * u[2],
    };
    self_part + mutual_part
}

/// Total dq voltages: ideal values plus the three imbalance contributions.
pub fn compose_total(
    ideal: (f64, f64),
    d_res: DqVoltageDelta,
    d_flux: DqVoltageDelta,
    d_ind: DqVoltageDelta,
) -> (f64, f64) {
    (
        ideal.0 + d_res.dv_d + d_flux.dv_d + d_ind.dv_d,
        ideal.1 + d_res.dv_q + d_flux.dv_q + d_ind.dv_q,
    )
}
