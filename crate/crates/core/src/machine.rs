//! Stationary-frame machine equations, the nominal/deviation split of the
//! per-phase parameters and the ideal dq models.
//!
//! Sign conventions: mutual inductances enter the flux linkage with a minus
//! sign (`λ_a = L_a i_a − M_ab i_b − M_ca i_c − λ_am cos θ`) and are
//! symmetric (`M_ab = M_ba`). Angles are electrical; torque is mechanical and
//! carries the pole-pair factor.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat3};
use crate::transforms::{self, park_inverse, park_inverse_rate, AbcVector, Dq0Vector};

const PHASES: [&str; 3] = ["a", "b", "c"];
const PAIRS: [&str; 3] = ["ab", "bc", "ca"];

/// Full per-phase parameter set of a star-connected three-phase PMSM.
///
/// Mutual inductances are stored per pair in the order `ab, bc, ca`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineParameters {
    /// Phase resistances (Ω).
    pub r: [f64; 3],
    /// Self-inductances (H).
    pub l: [f64; 3],
    /// Mutual inductance magnitudes `M_ab, M_bc, M_ca` (H).
    pub m: [f64; 3],
    /// Permanent-magnet flux linkage amplitudes (Wb).
    pub lam: [f64; 3],
    pub pole_pairs: u32,
}

impl MachineParameters {
    /// Phase spacing, fixed for a three-phase winding.
    pub const BETA: f64 = transforms::BETA;

    pub fn balanced(r: f64, l: f64, m: f64, lam: f64, pole_pairs: u32) -> Self {
        Self {
            r: [r; 3],
            l: [l; 3],
            m: [m; 3],
            lam: [lam; 3],
            pole_pairs,
        }
    }

    /// Checks every physical invariant, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        check_family(
            "r",
            &PHASES,
            &self.r,
            |v| v > 0.0,
            "resistance must be positive",
        )?;
        check_family(
            "l",
            &PHASES,
            &self.l,
            |v| v > 0.0,
            "self-inductance must be positive",
        )?;
        check_family("m", &PAIRS, &self.m, |_| true, "")?;
        check_family(
            "lam",
            &PHASES,
            &self.lam,
            |v| v >= 0.0,
            "flux linkage must be non-negative",
        )?;
        if self.pole_pairs == 0 {
            return Err(Error::invalid("pole_pairs", "must be a positive integer"));
        }
        if !self.is_inductance_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(())
    }

    /// Per-family averages as an ideal dq machine.
    pub fn mean_dq(&self) -> NonSalientDq {
        let mean = |v: [f64; 3]| v.iter().sum::<f64>() / 3.0;
        NonSalientDq {
            r: mean(self.r),
            l_plus_m: mean(self.l) + mean(self.m),
            lam_m: mean(self.lam),
            pole_pairs: self.pole_pairs,
        }
    }

    /// The stationary-frame inductance matrix, `λ = L·i − λ_pm`.
    pub fn inductance_matrix(&self) -> [[f64; 3]; 3] {
        let [la, lb, lc] = self.l;
        let [mab, mbc, mca] = self.m;
        [[la, -mab, -mca], [-mab, lb, -mbc], [-mca, -mbc, lc]]
    }

    pub fn is_inductance_positive_definite(&self) -> bool {
        linalg::cholesky3(&self.inductance_matrix()).is_some()
    }

    pub fn is_balanced(&self) -> bool {
        let same = |v: &[f64; 3]| v[0] == v[1] && v[1] == v[2];
        same(&self.r) && same(&self.l) && same(&self.m) && same(&self.lam)
    }

    /// Back-EMF `ω ∂λ_pm/∂θ` per phase.
    pub fn back_emf(&self, theta: f64, omega_e: f64) -> AbcVector {
        let (_, sin) = transforms::phase_cos_sin(theta);
        AbcVector::new(
            omega_e * self.lam[0] * sin[0],
            omega_e * self.lam[1] * sin[1],
            omega_e * self.lam[2] * sin[2],
        )
    }
}

fn check_family(
    prefix: &str,
    suffixes: &[&str; 3],
    values: &[f64; 3],
    ok: impl Fn(f64) -> bool,
    reason: &str,
) -> Result<()> {
    for (suffix, &v) in suffixes.iter().zip(values) {
        let field = format!("{prefix}_{suffix}");
        if !v.is_finite() {
            return Err(Error::invalid(field, format!("must be finite (got {v})")));
        }
        if !ok(v) {
            return Err(Error::invalid(field, format!("{reason} (got {v})")));
        }
    }
    Ok(())
}

/// Nominal values plus non-negative per-phase (or per-pair) deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImbalanceDecomposition {
    pub nominal_r: f64,
    pub nominal_l: f64,
    pub nominal_m: f64,
    pub nominal_lam: f64,
    pub d_r: [f64; 3],
    pub d_l: [f64; 3],
    pub d_m: [f64; 3],
    pub d_lam: [f64; 3],
}

/// Splits each parameter family into its smallest value (the nominal) and
/// the deviations from it. Tied minima all get a zero deviation.
pub fn decompose(params: &MachineParameters) -> ImbalanceDecomposition {
    let (nominal_r, d_r) = split_min(params.r);
    let (nominal_l, d_l) = split_min(params.l);
    let (nominal_m, d_m) = split_min(params.m);
    let (nominal_lam, d_lam) = split_min(params.lam);
    ImbalanceDecomposition {
        nominal_r,
        nominal_l,
        nominal_m,
        nominal_lam,
        d_r,
        d_l,
        d_m,
        d_lam,
    }
}

fn split_min(values: [f64; 3]) -> (f64, [f64; 3]) {
    let nominal = values[0].min(values[1]).min(values[2]);
    (nominal, values.map(|v| v - nominal))
}

impl ImbalanceDecomposition {
    pub fn reconstruct(&self, pole_pairs: u32) -> MachineParameters {
        MachineParameters {
            r: self.d_r.map(|d| self.nominal_r + d),
            l: self.d_l.map(|d| self.nominal_l + d),
            m: self.d_m.map(|d| self.nominal_m + d),
            lam: self.d_lam.map(|d| self.nominal_lam + d),
            pole_pairs,
        }
    }

    /// The ideal non-salient dq machine built from the nominal values.
    pub fn nominal_dq(&self, pole_pairs: u32) -> NonSalientDq {
        NonSalientDq {
            r: self.nominal_r,
            l_plus_m: self.nominal_l + self.nominal_m,
            lam_m: self.nominal_lam,
            pole_pairs,
        }
    }
}

/// Electrical operating point: angle, speed, dq0 currents and their rates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OperatingPoint {
    pub theta: f64,
    pub omega_e: f64,
    pub i_d: f64,
    pub i_q: f64,
    pub i_0: f64,
    pub di_d: f64,
    pub di_q: f64,
    pub di_0: f64,
}

impl OperatingPoint {
    /// Steady operating point with constant dq0 currents.
    pub fn steady(theta: f64, omega_e: f64, i_d: f64, i_q: f64) -> Self {
        Self {
            theta,
            omega_e,
            i_d,
            i_q,
            ..Self::default()
        }
    }

    pub fn currents_dq0(&self) -> Dq0Vector {
        Dq0Vector::new(self.i_d, self.i_q, self.i_0)
    }

    pub fn current_rates_dq0(&self) -> Dq0Vector {
        Dq0Vector::new(self.di_d, self.di_q, self.di_0)
    }

    pub fn currents_abc(&self) -> AbcVector {
        park_inverse(self.currents_dq0(), self.theta)
    }

    /// `d i_abc / dt` including the rotation of the frame.
    pub fn current_rates_abc(&self) -> AbcVector {
        park_inverse_rate(
            self.currents_dq0(),
            self.current_rates_dq0(),
            self.theta,
            self.omega_e,
        )
    }

    pub fn is_finite(&self) -> bool {
        [
            self.theta,
            self.omega_e,
            self.i_d,
            self.i_q,
            self.i_0,
            self.di_d,
            self.di_q,
            self.di_0,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

pub fn flux_linkages(params: &MachineParameters, i_abc: AbcVector, theta: f64) -> AbcVector {
    let (cos, _) = transforms::phase_cos_sin(theta);
    let l_i = linalg::mat_vec3(&params.inductance_matrix(), i_abc.to_array());
    AbcVector::new(
        l_i[0] - params.lam[0] * cos[0],
        l_i[1] - params.lam[1] * cos[1],
        l_i[2] - params.lam[2] * cos[2],
    )
}

/// Terminal voltages `V_x = R_x i_x + dλ_x/dt` with position-independent
/// inductances.
pub fn phase_voltages(
    params: &MachineParameters,
    i_abc: AbcVector,
    di_abc: AbcVector,
    theta: f64,
    omega_e: f64,
) -> AbcVector {
    let l_di = linalg::mat_vec3(&params.inductance_matrix(), di_abc.to_array());
    let emf = params.back_emf(theta, omega_e);
    AbcVector::new(
        params.r[0] * i_abc.a + l_di[0] + emf.a,
        params.r[1] * i_abc.b + l_di[1] + emf.b,
        params.r[2] * i_abc.c + l_di[2] + emf.c,
    )
}

/// Electromagnetic torque (N·m) as the rotor-angle derivative of the
/// co-energy. Only the magnet term depends on θ because the inductances are
/// position independent.
pub fn torque_abc(params: &MachineParameters, i_abc: AbcVector, theta: f64) -> f64 {
    let (_, sin) = transforms::phase_cos_sin(theta);
    let i = i_abc.to_array();
    let electrical: f64 = (0..3).map(|x| params.lam[x] * i[x] * sin[x]).sum();
    f64::from(params.pole_pairs) * electrical
}

/// Output of an ideal dq model.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DqModelOutput {
    pub v_d: f64,
    pub v_q: f64,
    pub torque: f64,
}

/// Balanced non-salient machine seen from the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonSalientDq {
    pub r: f64,
    /// Synchronous inductance `L + M`.
    pub l_plus_m: f64,
    pub lam_m: f64,
    pub pole_pairs: u32,
}

impl NonSalientDq {
    /// Constant currents reached under constant dq voltages at speed `omega_e`.
    pub fn steady_state_current(&self, v_d: f64, v_q: f64, omega_e: f64) -> (f64, f64) {
        let x = omega_e * self.l_plus_m;
        let rhs_d = v_d;
        let rhs_q = v_q - omega_e * self.lam_m;
        // [R  X; -X  R] [i_d; i_q] = rhs
        let det = self.r * self.r + x * x;
        (
            (self.r * rhs_d - x * rhs_q) / det,
            (x * rhs_d + self.r * rhs_q) / det,
        )
    }

    /// Electrical time constant `(L + M) / R`.
    pub fn time_constant(&self) -> f64 {
        self.l_plus_m / self.r
    }
}

/// Salient machine with separate axis inductances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalientDq {
    pub r: f64,
    pub l_d: f64,
    pub l_q: f64,
    pub lam_m: f64,
    pub pole_pairs: u32,
}

pub fn ideal_dq_nonsalient(machine: &NonSalientDq, op: &OperatingPoint) -> DqModelOutput {
    let w = op.omega_e;
    DqModelOutput {
        v_d: machine.r * op.i_d + machine.l_plus_m * (op.di_d + w * op.i_q),
        v_q: machine.r * op.i_q + machine.l_plus_m * (op.di_q - w * op.i_d) + w * machine.lam_m,
        torque: 1.5 * f64::from(machine.pole_pairs) * machine.lam_m * op.i_q,
    }
}

pub fn ideal_dq_salient(machine: &SalientDq, op: &OperatingPoint) -> DqModelOutput {
    let w = op.omega_e;
    DqModelOutput {
        v_d: machine.r * op.i_d + w * machine.l_q * op.i_q + machine.l_d * op.di_d,
        v_q: machine.r * op.i_q - w * machine.l_d * op.i_d
            + machine.l_q * op.di_q
            + w * machine.lam_m,
        torque: 1.5
            * f64::from(machine.pole_pairs)
            * (machine.lam_m + (machine.l_q - machine.l_d) * op.i_d)
            * op.i_q,
    }
}

pub(crate) fn inverse_inductance(params: &MachineParameters) -> Option<Mat3> {
    linalg::inverse_spd3(&params.inductance_matrix())
}
