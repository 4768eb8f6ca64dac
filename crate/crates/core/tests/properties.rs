mod common_oracle;

use common_oracle::nominal_machine;
use pmsm_imbalance::transforms::{forward_matrix, inverse_matrix};
use pmsm_imbalance::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn angle() -> impl Strategy<Value = f64> {
    -20.0..20.0f64
}

fn component() -> impl Strategy<Value = f64> {
    -50.0..50.0f64
}

fn triple(scale: f64) -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(0.0..scale)
}

fn machine() -> impl Strategy<Value = MachineParameters> {
    (triple(0.02), triple(2e-5), triple(5e-6), triple(0.01)).prop_map(|(r, l, m, lam)| {
        let b = nominal_machine();
        MachineParameters {
            r: r.map(|d| b.r[0] + d),
            l: l.map(|d| b.l[0] + d),
            m: m.map(|d| b.m[0] + d),
            lam: lam.map(|d| b.lam[0] + d),
            pole_pairs: b.pole_pairs,
        }
    })
}

fn min_form(d: [f64; 3]) -> [f64; 3] {
    let m = d[0].min(d[1]).min(d[2]);
    d.map(|v| v - m)
}

/// Co-energy `W'(θ) = Σ ∫ λ_x dI_x` along the straight path `s·i`, by
/// Simpson's rule (exact here, the integrand is affine in `s`).
fn coenergy(p: &MachineParameters, i: AbcVector, theta: f64) -> f64 {
    let integrand = |s: f64| flux_linkages(p, i * s, theta).dot(i);
    (integrand(0.0) + 4.0 * integrand(0.5) + integrand(1.0)) / 6.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn transform_roundtrip(d in component(), q in component(), z in component(), theta in angle()) {
        let v = Dq0Vector::new(d, q, z);
        let back = park_forward(park_inverse(v, theta), theta);
        prop_assert!((back.d - d).abs() < 1e-12 && (back.q - q).abs() < 1e-12 && (back.zero - z).abs() < 1e-12);
    }

    #[test]
    fn transform_matrices_compose_to_identity(theta in angle()) {
        let f = forward_matrix(theta);
        let i = inverse_matrix(theta);
        for r in 0..3 {
            for c in 0..3 {
                let v: f64 = (0..3).map(|k| f[r][k] * i[k][c]).sum();
                let expect = if r == c { 1.0 } else { 0.0 };
                prop_assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transforms_are_linear(a in prop::array::uniform3(component()), b in prop::array::uniform3(component()),
                             s in -3.0..3.0f64, theta in angle()) {
        let (x, y) = (AbcVector::from_array(a), AbcVector::from_array(b));
        let lhs = park_forward(x * s + y, theta);
        let rhs = park_forward(x, theta) * s + park_forward(y, theta);
        prop_assert!((lhs - rhs).to_array().iter().all(|e| e.abs() < 1e-10));
    }

    #[test]
    fn balanced_sinusoid_is_constant(amp in 0.0..100.0f64, theta in angle()) {
        let abc = AbcVector::new(
            amp * theta.cos(),
            amp * (theta - BETA).cos(),
            amp * (theta - 2.0 * BETA).cos(),
        );
        let dq = park_forward(abc, theta);
        prop_assert!((dq.d - amp).abs() < 1e-12 * (1.0 + amp));
        prop_assert!(dq.q.abs() < 1e-12 * (1.0 + amp) && dq.zero.abs() < 1e-12 * (1.0 + amp));
    }

    #[test]
    fn power_balance(v in prop::array::uniform3(component()), i in prop::array::uniform3(component()), theta in angle()) {
        let (v, i) = (AbcVector::from_array(v), AbcVector::from_array(i));
        let (vd, id) = (park_forward(v, theta), park_forward(i, theta));
        let abc = v.dot(i);
        let dq = 1.5 * (vd.d * id.d + vd.q * id.q) + 3.0 * vd.zero * id.zero;
        let scale = v.dot(v).sqrt() * i.dot(i).sqrt();
        prop_assert!((abc - dq).abs() <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn decomposition_roundtrip_is_exact(p in machine()) {
        let d = decompose(&p);
        prop_assert_eq!(d.reconstruct(p.pole_pairs), p);
        for dev in [d.d_r, d.d_l, d.d_m, d.d_lam] {
            prop_assert!(dev.iter().all(|&x| x >= 0.0));
            prop_assert!(dev.contains(&0.0));
        }
    }

    #[test]
    fn phase_voltages_linear_in_currents(p in machine(), i1 in prop::array::uniform3(component()),
                                         i2 in prop::array::uniform3(component()), di in prop::array::uniform3(-1e4..1e4f64),
                                         s in -2.0..2.0f64, theta in angle(), w in 0.0..1000.0f64) {
        let (i1, i2, di) = (AbcVector::from_array(i1), AbcVector::from_array(i2), AbcVector::from_array(di));
        let z = AbcVector::default();
        let emf = phase_voltages(&p, z, z, theta, w);
        let combined = phase_voltages(&p, i1 * s + i2, di * s, theta, w) - emf;
        let parts = (phase_voltages(&p, i1, di, theta, w) - emf) * s + (phase_voltages(&p, i2, z, theta, w) - emf);
        let scale = 1.0 + combined.dot(combined).sqrt();
        prop_assert!((combined - parts).to_array().iter().all(|e| e.abs() < 1e-10 * scale));
    }

    #[test]
    fn balanced_torque_is_position_independent(i_d in component(), i_q in component(), theta in angle()) {
        let p = nominal_machine();
        let i = park_inverse(Dq0Vector::new(i_d, i_q, 0.0), theta);
        let t = torque_abc(&p, i, theta);
        let expect = 1.5 * 4.0 * 0.05 * i_q;
        prop_assert!((t - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }

    #[test]
    fn torque_is_coenergy_derivative(p in machine(), i in prop::array::uniform3(component()), theta in angle()) {
        let i = AbcVector::from_array(i);
        let h = 1e-6;
        let fd = f64::from(p.pole_pairs) * (coenergy(&p, i, theta + h) - coenergy(&p, i, theta - h)) / (2.0 * h);
        let t = torque_abc(&p, i, theta);
        let scale = f64::from(p.pole_pairs) * (0..3).map(|x| p.lam[x] * i.to_array()[x].abs()).sum::<f64>();
        prop_assert!((t - fd).abs() <= 1e-6 * scale.max(1e-12), "{t} vs {fd}");
    }

    #[test]
    fn coefficients_ignore_common_offset(d in triple(0.05), c in 0.0..0.05f64) {
        let a = resistance_coeffs(d);
        let b = resistance_coeffs(d.map(|v| v + c));
        prop_assert!((a.k - b.k).abs() < 1e-15);
        if a.k > 1e-6 {
            prop_assert!((a.phi - b.phi).abs() < 1e-9);
        }
    }

    #[test]
    fn magnitude_permutation_invariant_and_cyclic_phase_shift(d in triple(0.05)) {
        let [a, b, c] = d;
        let base = flux_coeffs(d);
        for perm in [[a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            prop_assert!((flux_coeffs(perm).k - base.k).abs() < 1e-15);
        }
        if base.k > 1e-6 {
            // a→b→c→a moves the deviation of a onto b: the phase advances by 2π/3
            let rotated = flux_coeffs([c, a, b]);
            let shift = imbalance::wrap_phase(rotated.phi - base.phi);
            prop_assert!((shift - 2.0 * PI / 3.0).abs() < 1e-9, "shift {shift}");
        }
    }

    #[test]
    fn deltas_are_homogeneous(d in triple(0.02), m in triple(5e-6), s in 0.0..5.0f64, theta in angle(),
                              i_d in component(), i_q in component(), w in 0.0..1000.0f64) {
        let op = OperatingPoint { theta, omega_e: w, i_d, i_q, i_0: 1.0, di_d: 30.0, di_q: -10.0, di_0: 4.0 };
        let close = |x: DqVoltageDelta, y: DqVoltageDelta| {
            let scale = 1e-12 + x.dv_d.abs().max(x.dv_q.abs());
            (x.dv_d - y.dv_d).abs() < 1e-12 * scale && (x.dv_q - y.dv_q).abs() < 1e-12 * scale
        };
        let scaled = |v: DqVoltageDelta| DqVoltageDelta { dv_d: v.dv_d * s, dv_q: v.dv_q * s };
        prop_assert!(close(resistance_delta(d.map(|x| x * s), &op), scaled(resistance_delta(d, &op))));
        prop_assert!(close(flux_delta(d.map(|x| x * s), w, theta), scaled(flux_delta(d, w, theta))));
        prop_assert!(close(
            inductance_delta(d.map(|x| x * s), m.map(|x| x * s), &op),
            scaled(inductance_delta(d, m, &op))
        ));
        // linear in ω
        prop_assert!(close(flux_delta(d, w * s, theta), scaled(flux_delta(d, w, theta))));
        // jointly linear in (di_dq0, ω·i_dq)
        let op_s = OperatingPoint { di_d: op.di_d * s, di_q: op.di_q * s, di_0: op.di_0 * s, omega_e: w * s, ..op };
        prop_assert!(close(inductance_delta(d, m, &op_s), scaled(inductance_delta(d, m, &op))));
    }

    #[test]
    fn demodulate_is_exact_on_span(dc in component(), k in 0.0..10.0f64, phi in -PI..PI, s in -4.0..4.0f64,
                                   periods in 1.0..5.0f64, start in angle()) {
        let n = (periods * 80.0).ceil() as usize;
        let th: Vec<f64> = (0..n).map(|j| start + 2.0 * PI * periods * j as f64 / n as f64).collect();
        let sig: Vec<f64> = th.iter().map(|t| dc + k * (2.0 * t + phi).cos()).collect();
        let h = demodulate(&sig, &th).unwrap();
        let scale = 1.0 + dc.abs() + k;
        prop_assert!(h.residual_rms < 1e-12 * scale);
        prop_assert!((h.dc - dc).abs() < 1e-10 * scale);
        prop_assert!((h.second.re() - k * phi.cos()).abs() < 1e-10 * scale);
        prop_assert!((h.second.im() - k * phi.sin()).abs() < 1e-10 * scale);

        let scaled: Vec<f64> = sig.iter().map(|v| v * s).collect();
        let hs = demodulate(&scaled, &th).unwrap();
        prop_assert!((hs.dc - s * h.dc).abs() < 1e-9 * scale * (1.0 + s.abs()));
        prop_assert!((hs.second.k - s.abs() * h.second.k).abs() < 1e-9 * scale * (1.0 + s.abs()));
        if k > 1e-3 && s > 1e-3 {
            prop_assert!((hs.second.phi - h.second.phi).abs() < 1e-9);
        }
    }

    #[test]
    fn invert_is_identity_on_min_form(d in triple(0.05)) {
        let d = min_form(d);
        let inv = invert_phasor(d.iter().sum(), resistance_coeffs(d));
        for i in 0..3 {
            prop_assert!((inv.per_phase[i] - d[i]).abs() < 1e-15);
        }
        prop_assert!(inv.shift.abs() < 1e-15);
    }
}

#[test]
fn demodulated_delta_matches_scaled_coefficients() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    let n = 200;
    let th: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    for _ in 0..100 {
        let d = [0; 3].map(|_| rng.random_range(0.0..0.03));
        let i_d = rng.random_range(1.0..20.0);
        let sig: Vec<f64> = th
            .iter()
            .map(|&t| resistance_delta(d, &OperatingPoint::steady(t, 0.0, i_d, 0.0)).dv_d)
            .collect();
        let h = demodulate(&sig, &th).unwrap();
        let k = resistance_coeffs(d).scaled(i_d);
        assert!((h.second.re() - k.re()).hypot(h.second.im() - k.im()) < 1e-10 * k.k);
    }
}

#[test]
fn resistance_waveform_demodulates_to_scaled_phasor() {
    let d = [0.03, 0.01, 0.02];
    let n = 360;
    let th: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let sig: Vec<f64> = th
        .iter()
        .map(|&t| resistance_delta(d, &OperatingPoint::steady(t, 0.0, 0.0, 10.0)).dv_q)
        .collect();
    let h = demodulate(&sig, &th).unwrap();
    assert!((h.second.k - 0.057_735_026_918_962_58).abs() < 1e-12);
    // ΔV_qR = S/3·i_q − K cos(2θ + φ)·i_q: phase flips by π
    let expect = imbalance::wrap_phase(resistance_coeffs(d).phi + PI);
    assert!((h.second.phi - expect).abs() < 1e-10);
}
