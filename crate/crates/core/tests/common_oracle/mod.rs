// Shared test-only oracles. Included with `mod common_oracle;`.
#![allow(dead_code)]

use pmsm_imbalance::transforms::{forward_matrix, inverse_matrix};
use pmsm_imbalance::{MachineParameters, OperatingPoint};
use rand::Rng;

pub fn nominal_machine() -> MachineParameters {
    MachineParameters::balanced(0.1, 1.5e-4, 5e-5, 0.05, 4)
}

/// Random deviations up to `frac` of each nominal value, in min-as-nominal
/// form, optionally restricted to families.
pub fn random_machine(
    rng: &mut impl Rng,
    frac: f64,
    res: bool,
    flux: bool,
    ind: bool,
) -> MachineParameters {
    let base = nominal_machine();
    let mut dev = |on: bool, nominal: f64| -> [f64; 3] {
        if !on {
            return [0.0; 3];
        }
        let mut d = [0.0; 3];
        for v in d.iter_mut() {
            *v = rng.random_range(0.0..frac) * nominal;
        }
        let m = d[0].min(d[1]).min(d[2]);
        d.map(|v| v - m)
    };
    let d_r = dev(res, base.r[0]);
    let d_lam = dev(flux, base.lam[0]);
    let d_l = dev(ind, base.l[0]);
    let d_m = dev(ind, base.m[0]);
    MachineParameters {
        r: d_r.map(|d| base.r[0] + d),
        l: d_l.map(|d| base.l[0] + d),
        m: d_m.map(|d| base.m[0] + d),
        lam: d_lam.map(|d| base.lam[0] + d),
        pole_pairs: base.pole_pairs,
    }
}

pub fn random_op(rng: &mut impl Rng, rated: f64, with_zero_seq: bool) -> OperatingPoint {
    let mut op = OperatingPoint {
        theta: rng.random_range(-10.0..10.0),
        omega_e: rng.random_range(0.0..1000.0),
        i_d: rng.random_range(-rated..rated),
        i_q: rng.random_range(-rated..rated),
        di_d: rng.random_range(-1e4..1e4),
        di_q: rng.random_range(-1e4..1e4),
        ..Default::default()
    };
    if with_zero_seq {
        op.i_0 = rng.random_range(-rated..rated) * 0.2;
        op.di_0 = rng.random_range(-1e3..1e3);
    }
    op
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat_vec(a: &[[f64; 3]; 3], x: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| (0..3).map(|k| a[i][k] * x[k]).sum())
}

/// Brute-force dq0 voltage of an arbitrary machine: builds the abc
/// resistance, inductance and back-EMF terms by hand and rotates them with
/// the forward transform matrix.
pub fn brute_force_dq0(p: &MachineParameters, op: &OperatingPoint) -> [f64; 3] {
    let ti = inverse_matrix(op.theta);
    let tf = forward_matrix(op.theta);
    let i_abc = mat_vec(&ti, [op.i_d, op.i_q, op.i_0]);
    // d/dt(T_i i) = T_i (ḋ + ω q, q̇ − ω d, 0̇)
    let di_abc = mat_vec(
        &ti,
        [
            op.di_d + op.omega_e * op.i_q,
            op.di_q - op.omega_e * op.i_d,
            op.di_0,
        ],
    );
    let l = [
        [p.l[0], -p.m[0], -p.m[2]],
        [-p.m[0], p.l[1], -p.m[1]],
        [-p.m[2], -p.m[1], p.l[2]],
    ];
    let l_di = mat_vec(&l, di_abc);
    let beta = 2.0 * std::f64::consts::PI / 3.0;
    let mut v = [0.0; 3];
    for x in 0..3 {
        let ang = op.theta - x as f64 * beta;
        v[x] = p.r[x] * i_abc[x] + l_di[x] + op.omega_e * p.lam[x] * ang.sin();
    }
    mat_vec(&tf, v)
}

/// `T_f · diag(d) · T_i`, the dq0 image of a diagonal per-phase deviation.
pub fn rotated_diagonal(d: [f64; 3], theta: f64) -> [[f64; 3]; 3] {
    let diag = [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]];
    mat_mul(
        &forward_matrix(theta),
        &mat_mul(&diag, &inverse_matrix(theta)),
    )
}

pub fn rel_err(got: f64, expect: f64, scale: f64) -> f64 {
    (got - expect).abs() / scale.max(f64::MIN_POSITIVE)
}
