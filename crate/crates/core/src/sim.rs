//! Reference simulation in the stationary frame.
//!
//! Current-fed runs evaluate the abc equations exactly along prescribed
//! sinusoidal currents. Voltage-fed runs integrate the winding ODE
//! `L·di/dt = v − R∘i − e(θ)` with fixed-step RK4 from zero current.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat3};
use crate::machine::{self, phase_voltages, torque_abc, MachineParameters};
use crate::transforms::{park_forward, park_inverse, park_inverse_rate, AbcVector, Dq0Vector};

/// Steps per electrical period required at the commanded speed.
pub const MIN_STEPS_PER_PERIOD: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedMode {
    CurrentFed,
    VoltageFed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neutral {
    /// Star point floating: `i_a + i_b + i_c = 0`.
    Isolated,
    /// Star point tied to the source midpoint; zero-sequence current may flow.
    Driven,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub mode: FeedMode,
    pub neutral: Neutral,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-6,
            duration: 0.02,
            mode: FeedMode::CurrentFed,
            neutral: Neutral::Isolated,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, omega_e: f64) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!(
                "dt must be positive (got {})",
                self.dt
            )));
        }
        if !(self.duration >= self.dt) || !self.duration.is_finite() {
            return Err(Error::Config(format!(
                "duration {} must be at least dt {}",
                self.duration, self.dt
            )));
        }
        if !omega_e.is_finite() {
            return Err(Error::Config("electrical speed must be finite".into()));
        }
        if omega_e != 0.0 {
            let period = 2.0 * PI / omega_e.abs();
            if self.dt > period / MIN_STEPS_PER_PERIOD {
                return Err(Error::Config(format!(
                    "dt {} exceeds period/{MIN_STEPS_PER_PERIOD} = {:e} s at ω_e = {omega_e} rad/s",
                    self.dt,
                    period / MIN_STEPS_PER_PERIOD
                )));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

/// Uniformly sampled simulation output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub theta: Vec<f64>,
    pub channels: Vec<(String, Vec<f64>)>,
}

/// Channel names recorded by both simulation modes, in output order.
pub const CHANNELS: [&str; 13] = [
    "v_a", "v_b", "v_c", "i_a", "i_b", "i_c", "v_d", "v_q", "v_0", "i_d", "i_q", "i_0", "t_e",
];

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|(n, _)| n.as_str())
    }

    /// Keeps only the named channels, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<TimeSeries> {
        let mut channels = Vec::with_capacity(names.len());
        for name in names {
            let data = self
                .channel(name)
                .ok_or_else(|| Error::Input(format!("unknown channel `{name}`")))?;
            channels.push((name.to_string(), data.to_vec()));
        }
        Ok(TimeSeries {
            t: self.t.clone(),
            theta: self.theta.clone(),
            channels,
        })
    }

    /// Every `stride`-th sample starting with the first.
    pub fn decimate(&self, stride: usize) -> TimeSeries {
        let stride = stride.max(1);
        let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
        TimeSeries {
            t: pick(&self.t),
            theta: pick(&self.theta),
            channels: self
                .channels
                .iter()
                .map(|(n, v)| (n.clone(), pick(v)))
                .collect(),
        }
    }

    /// Samples with `t >= t_start`.
    pub fn window_from(&self, t_start: f64) -> TimeSeries {
        let first = self.t.partition_point(|&t| t < t_start);
        TimeSeries {
            t: self.t[first..].to_vec(),
            theta: self.theta[first..].to_vec(),
            channels: self
                .channels
                .iter()
                .map(|(n, v)| (n.clone(), v[first..].to_vec()))
                .collect(),
        }
    }
}

struct Recorder {
    series: TimeSeries,
}

impl Recorder {
    fn with_capacity(n: usize) -> Self {
        Self {
            series: TimeSeries {
                t: Vec::with_capacity(n),
                theta: Vec::with_capacity(n),
                channels: CHANNELS
                    .iter()
                    .map(|c| (c.to_string(), Vec::with_capacity(n)))
                    .collect(),
            },
        }
    }

    fn push(&mut self, t: f64, theta: f64, v: AbcVector, i: AbcVector, torque: f64) {
        let v_dq = park_forward(v, theta);
        let i_dq = park_forward(i, theta);
        let row = [
            v.a, v.b, v.c, i.a, i.b, i.c, v_dq.d, v_dq.q, v_dq.zero, i_dq.d, i_dq.q, i_dq.zero,
            torque,
        ];
        self.series.t.push(t);
        self.series.theta.push(theta);
        for ((_, ch), x) in self.series.channels.iter_mut().zip(row) {
            ch.push(x);
        }
    }
}

/// Exact abc-frame response to constant dq0 current commands.
///
/// `θ(t) = ω_e t`; the current derivatives are the analytic rotation terms.
pub fn run_current_fed(
    params: &MachineParameters,
    i_cmd: Dq0Vector,
    omega_e: f64,
    cfg: &SimConfig,
) -> Result<TimeSeries> {
    params.validate()?;
    cfg.validate(omega_e)?;
    if !i_cmd.is_finite() {
        return Err(Error::Input("current command must be finite".into()));
    }
    let n = cfg.steps();
    let mut rec = Recorder::with_capacity(n + 1);
    let rate = Dq0Vector::default();
    for k in 0..=n {
        let t = k as f64 * cfg.dt;
        let theta = omega_e * t;
        let i = park_inverse(i_cmd, theta);
        let di = park_inverse_rate(i_cmd, rate, theta, omega_e);
        let v = phase_voltages(params, i, di, theta, omega_e);
        rec.push(t, theta, v, i, torque_abc(params, i, theta));
    }
    Ok(rec.series)
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let axpy = |a: f64, k: &[f64; N]| {
        let mut out = *y;
        for i in 0..N {
            out[i] += a * k[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(0.5 * h, &k2));
    let k4 = f(t + h, &axpy(h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Winding dynamics under a dq voltage command.
struct VoltageFedPlant<'a> {
    params: &'a MachineParameters,
    v_cmd: Dq0Vector,
    omega_e: f64,
    /// Inverse of the full (driven) or reduced (isolated) inductance matrix.
    l_inv: Mat3,
    l_inv2: [[f64; 2]; 2],
}

impl VoltageFedPlant<'_> {
    /// `v − R∘i − e(θ)` per phase.
    fn drive(&self, t: f64, i: AbcVector) -> AbcVector {
        let theta = self.omega_e * t;
        let v = park_inverse(self.v_cmd, theta);
        let emf = self.params.back_emf(theta, self.omega_e);
        let r = &self.params.r;
        AbcVector::new(
            v.a - r[0] * i.a - emf.a,
            v.b - r[1] * i.b - emf.b,
            v.c - r[2] * i.c - emf.c,
        )
    }

    fn isolated_currents(y: &[f64; 2]) -> AbcVector {
        AbcVector::new(y[0], y[1], -y[0] - y[1])
    }

    /// Isolated star: states `(i_a, i_b)`, `i_c = −i_a − i_b`. The neutral
    /// voltage drops out of `Cᵀ L C ẏ = Cᵀ(v − R i − e)` with
    /// `C = [[1, 0], [0, 1], [−1, −1]]`.
    fn isolated_rate(&self, t: f64, y: &[f64; 2]) -> [f64; 2] {
        let rhs = self.drive(t, Self::isolated_currents(y));
        let b = [rhs.a - rhs.c, rhs.b - rhs.c];
        let m = &self.l_inv2;
        [
            m[0][0] * b[0] + m[0][1] * b[1],
            m[1][0] * b[0] + m[1][1] * b[1],
        ]
    }

    fn driven_rate(&self, t: f64, y: &[f64; 3]) -> [f64; 3] {
        let rhs = self.drive(t, AbcVector::from_array(*y));
        linalg::mat_vec3(&self.l_inv, rhs.to_array())
    }
}

fn reduced_inductance(l: &Mat3) -> [[f64; 2]; 2] {
    // Cᵀ L C for C = [[1, 0], [0, 1], [−1, −1]]
    let a = l[0][0] - 2.0 * l[0][2] + l[2][2];
    let b = l[1][1] - 2.0 * l[1][2] + l[2][2];
    let c = l[0][1] - l[0][2] - l[1][2] + l[2][2];
    [[a, c], [c, b]]
}

/// Fixed-step RK4 integration of the voltage-fed machine from rest.
///
/// The applied phase voltages are `park_inverse((v_d, v_q, 0), ω_e t)`. The
/// recorded `v_*` channels are the winding voltages, i.e. the source
/// voltages minus the neutral-point shift for an isolated star.
pub fn run_voltage_fed(
    params: &MachineParameters,
    v_dq: (f64, f64),
    omega_e: f64,
    cfg: &SimConfig,
) -> Result<TimeSeries> {
    params.validate()?;
    cfg.validate(omega_e)?;
    if !v_dq.0.is_finite() || !v_dq.1.is_finite() {
        return Err(Error::Input("voltage command must be finite".into()));
    }
    let l_mat = params.inductance_matrix();
    let l_inv = machine::inverse_inductance(params).ok_or(Error::NotPositiveDefinite)?;
    let l_inv2 =
        linalg::inverse_spd2(reduced_inductance(&l_mat)).ok_or(Error::NotPositiveDefinite)?;
    let plant = VoltageFedPlant {
        params,
        v_cmd: Dq0Vector::new(v_dq.0, v_dq.1, 0.0),
        omega_e,
        l_inv,
        l_inv2,
    };

    let n = cfg.steps();
    let h = cfg.dt;
    let mut rec = Recorder::with_capacity(n + 1);
    let record = |rec: &mut Recorder, t: f64, i: AbcVector, di: AbcVector| {
        let theta = omega_e * t;
        let v = phase_voltages(params, i, di, theta, omega_e);
        rec.push(t, theta, v, i, torque_abc(params, i, theta));
    };
    let diverged = |step: usize, t: f64, i: AbcVector| Error::Integration {
        step,
        time: t,
        detail: format!("non-finite phase currents ({}, {}, {})", i.a, i.b, i.c),
    };

    match cfg.neutral {
        Neutral::Isolated => {
            let f = |t: f64, y: &[f64; 2]| plant.isolated_rate(t, y);
            let mut y = [0.0; 2];
            for k in 0..=n {
                let t = k as f64 * h;
                let i = VoltageFedPlant::isolated_currents(&y);
                if !i.is_finite() {
                    return Err(diverged(k, t, i));
                }
                let rate = f(t, &y);
                record(&mut rec, t, i, VoltageFedPlant::isolated_currents(&rate));
                if k < n {
                    y = rk4_step(f, t, &y, h);
                }
            }
        }
        Neutral::Driven => {
            let f = |t: f64, y: &[f64; 3]| plant.driven_rate(t, y);
            let mut y = [0.0; 3];
            for k in 0..=n {
                let t = k as f64 * h;
                let i = AbcVector::from_array(y);
                if !i.is_finite() {
                    return Err(diverged(k, t, i));
                }
                let rate = f(t, &y);
                record(&mut rec, t, i, AbcVector::from_array(rate));
                if k < n {
                    y = rk4_step(f, t, &y, h);
                }
            }
        }
    }
    Ok(rec.series)
}
