use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use pmsm_imbalance::{
    compare_waveforms, compose_total, decompose, demodulate, fit_flux, fit_resistance, flux_coeffs,
    flux_delta, ideal_dq_nonsalient, inductance_coeffs, inductance_delta, predict_steady_ripple,
    resistance_coeffs, resistance_delta, run_current_fed, run_voltage_fed, Dq0Vector, FeedMode,
    IdentificationResult, MachineParameters, OperatingPoint, SecondHarmonicPhasor, SimConfig,
    TimeSeries,
};

use crate::csv_io::{read_csv, write_csv};
use crate::error::{CliError, Result};
use crate::scenario::{fmt, Family, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Job {
    Coeffs,
    Simulate,
    Compare,
    Identify,
}

impl Job {
    pub fn name(self) -> &'static str {
        match self {
            Job::Coeffs => "coeffs",
            Job::Simulate => "simulate",
            Job::Compare => "compare",
            Job::Identify => "identify",
        }
    }

    fn used_sections(self) -> &'static [&'static str] {
        match self {
            Job::Coeffs => &["machine", "imbalance", "operating"],
            Job::Simulate => &["machine", "imbalance", "operating", "sim", "output"],
            Job::Compare => &["machine", "imbalance", "operating", "sim", "output"],
            Job::Identify => &["machine", "imbalance", "operating", "sim", "identify"],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct JobOutput {
    /// `key: value` lines, also written to `<job>_summary.txt`.
    pub summary: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl JobOutput {
    fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.summary.push((key.into(), value.into()));
    }

    fn push_phasor(&mut self, prefix: &str, p: SecondHarmonicPhasor) {
        self.push(format!("{prefix}_k"), fmt(p.k));
        self.push(format!("{prefix}_phi"), fmt(p.phi));
    }

    pub fn summary_text(&self) -> String {
        self.summary
            .iter()
            .map(|(k, v)| format!("{k}: {v}\n"))
            .collect()
    }
}

fn triple(v: [f64; 3]) -> String {
    format!("[{}, {}, {}]", fmt(v[0]), fmt(v[1]), fmt(v[2]))
}

/// Runs `job`, writing its files into `out_dir` (created if missing).
pub fn run_scenario(job: Job, scenario: &Scenario, out_dir: &Path) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    for section in &scenario.sections {
        if !job.used_sections().contains(&section.as_str()) {
            out.warnings.push(format!(
                "[{section}] is not used by `{}` and was ignored",
                job.name()
            ));
        }
    }
    out.push("job", job.name());
    for (k, v) in scenario.describe() {
        out.push(format!("scenario.{k}"), v);
    }
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    match job {
        Job::Coeffs => coeffs(scenario, &mut out),
        Job::Simulate => simulate(scenario, out_dir, &mut out)?,
        Job::Compare => compare(scenario, out_dir, &mut out)?,
        Job::Identify => identify(scenario, &mut out)?,
    }
    let path = out_dir.join(format!("{}_summary.txt", job.name()));
    std::fs::write(&path, out.summary_text()).map_err(|e| CliError::io(&path, e))?;
    out.files.push(path);
    Ok(out)
}

fn coeffs(s: &Scenario, out: &mut JobOutput) {
    let dec = decompose(&s.machine);
    out.push("nominal_r", fmt(dec.nominal_r));
    out.push("nominal_l", fmt(dec.nominal_l));
    out.push("nominal_m", fmt(dec.nominal_m));
    out.push("nominal_lam", fmt(dec.nominal_lam));
    out.push("d_r", triple(dec.d_r));
    out.push("d_l", triple(dec.d_l));
    out.push("d_m", triple(dec.d_m));
    out.push("d_lam", triple(dec.d_lam));
    let sum = |v: [f64; 3]| v.iter().sum::<f64>();
    out.push("s_r", fmt(sum(dec.d_r)));
    out.push_phasor("resistance", resistance_coeffs(dec.d_r));
    out.push("s_lam", fmt(sum(dec.d_lam)));
    out.push_phasor("flux", flux_coeffs(dec.d_lam));
    let ind = inductance_coeffs(dec.d_l, dec.d_m);
    out.push("s_l", fmt(sum(dec.d_l)));
    out.push_phasor("self_inductance", ind.self_l);
    out.push("s_m", fmt(sum(dec.d_m)));
    out.push_phasor("mutual_inductance", ind.mutual);
}

fn current_command(s: &Scenario) -> Dq0Vector {
    Dq0Vector::new(s.operating.i_d, s.operating.i_q, s.operating.i_0)
}

fn harmonic_lines(series: &TimeSeries, names: &[&str], out: &mut JobOutput) {
    for name in names {
        let Some(data) = series.channel(name) else {
            continue;
        };
        let mean = data.iter().sum::<f64>() / data.len().max(1) as f64;
        match demodulate(data, &series.theta) {
            Ok(h) => {
                out.push(format!("{name}_dc"), fmt(h.dc));
                out.push_phasor(&format!("{name}_2theta"), h.second);
            }
            Err(_) => out.push(format!("{name}_mean"), fmt(mean)),
        }
    }
}

fn simulate(s: &Scenario, out_dir: &Path, out: &mut JobOutput) -> Result<()> {
    let omega = s.operating.omega_e;
    let series = match s.sim.mode {
        FeedMode::CurrentFed => run_current_fed(&s.machine, current_command(s), omega, &s.sim)?,
        FeedMode::VoltageFed => {
            if s.operating.i_d != 0.0 || s.operating.i_q != 0.0 || s.operating.i_0 != 0.0 {
                out.warnings.push(
                    "operating currents are ignored in voltage mode (the run starts from rest)"
                        .into(),
                );
            }
            let v = (
                s.operating.v_d.unwrap_or(0.0),
                s.operating.v_q.unwrap_or(0.0),
            );
            run_voltage_fed(&s.machine, v, omega, &s.sim)?
        }
    };
    out.push("samples", series.len().to_string());

    // steady-state statistics over the full run, or after the start-up
    // transient when voltage-fed
    let mut steady = series.clone();
    if s.sim.mode == FeedMode::VoltageFed {
        let mean = s.machine.mean_dq();
        let mut start = 5.0 * mean.time_constant();
        if omega != 0.0 {
            start = start.max(2.0 * 2.0 * PI / omega.abs());
        }
        out.push("steady_window_start", fmt(start));
        steady = series.window_from(start);
        let v = (
            s.operating.v_d.unwrap_or(0.0),
            s.operating.v_q.unwrap_or(0.0),
        );
        let pred = predict_steady_ripple(&s.machine, v, omega);
        out.push("predicted_i_d_dc", fmt(pred.i_d));
        out.push("predicted_i_q_dc", fmt(pred.i_q));
        out.push_phasor("predicted_i_d_2theta", pred.ripple_d);
        out.push_phasor("predicted_i_q_2theta", pred.ripple_q);
    }
    if steady.is_empty() {
        out.warnings
            .push("run ends before the steady-state window; no statistics reported".into());
    } else {
        harmonic_lines(&steady, &["v_d", "v_q", "i_d", "i_q", "t_e"], out);
    }

    let names: Vec<&str> = s.output.channels.iter().map(String::as_str).collect();
    let written = series.select(&names)?.decimate(s.output.stride);
    let path = out_dir.join("simulate.csv");
    write_csv(&written, &path)?;
    out.push("output_rows", written.len().to_string());
    out.files.push(path);
    Ok(())
}

/// Closed-form dq voltages at the current command and angle `theta`.
fn analytical_dq(p: &MachineParameters, s: &Scenario, theta: f64) -> (f64, f64) {
    let dec = decompose(p);
    let nominal = dec.nominal_dq(p.pole_pairs);
    let op = &s.operating;
    let point = OperatingPoint {
        i_0: op.i_0,
        ..OperatingPoint::steady(theta, op.omega_e, op.i_d, op.i_q)
    };
    let ideal = ideal_dq_nonsalient(&nominal, &point);
    compose_total(
        (ideal.v_d, ideal.v_q),
        resistance_delta(dec.d_r, &point),
        flux_delta(dec.d_lam, op.omega_e, theta),
        inductance_delta(dec.d_l, dec.d_m, &point),
    )
}

fn compare(s: &Scenario, out_dir: &Path, out: &mut JobOutput) -> Result<()> {
    if s.sim.mode == FeedMode::VoltageFed {
        out.warnings
            .push("compare always runs current-fed; sim.mode was ignored".into());
    }
    if s.has_section("output") && !s.defaulted.iter().any(|k| k == "output.channels") {
        out.warnings
            .push("output.channels is ignored by compare; only output.stride applies".into());
    }
    let cfg = SimConfig {
        mode: FeedMode::CurrentFed,
        ..s.sim
    };
    let sim = run_current_fed(&s.machine, current_command(s), s.operating.omega_e, &cfg)?;
    let sim_d = sim.channel("v_d").expect("recorded channel");
    let sim_q = sim.channel("v_q").expect("recorded channel");
    let (mut model_d, mut model_q) = (Vec::with_capacity(sim.len()), Vec::with_capacity(sim.len()));
    for &theta in &sim.theta {
        let (d, q) = analytical_dq(&s.machine, s, theta);
        model_d.push(d);
        model_q.push(q);
    }
    let err_d = compare_waveforms(&model_d, sim_d)?;
    let err_q = compare_waveforms(&model_q, sim_q)?;
    out.push("samples", sim.len().to_string());
    out.push(
        "max_abs_error",
        fmt(err_d.max_abs_error.max(err_q.max_abs_error)),
    );
    for (axis, e) in [("d", err_d), ("q", err_q)] {
        out.push(format!("max_abs_error_{axis}"), fmt(e.max_abs_error));
        out.push(format!("rms_error_{axis}"), fmt(e.rms_error));
        out.push(
            format!("relative_rms_{axis}"),
            e.relative_rms.map(fmt).unwrap_or_else(|| "n/a".into()),
        );
    }

    let table = TimeSeries {
        t: sim.t.clone(),
        theta: sim.theta.clone(),
        channels: vec![
            ("v_d_sim".into(), sim_d.to_vec()),
            ("v_q_sim".into(), sim_q.to_vec()),
            ("v_d_model".into(), model_d.clone()),
            ("v_q_model".into(), model_q.clone()),
            (
                "err_d".into(),
                model_d.iter().zip(sim_d).map(|(a, b)| a - b).collect(),
            ),
            (
                "err_q".into(),
                model_q.iter().zip(sim_q).map(|(a, b)| a - b).collect(),
            ),
        ],
    }
    .decimate(s.output.stride);
    let path = out_dir.join("compare.csv");
    write_csv(&table, &path)?;
    out.files.push(path);
    Ok(())
}

fn identify(s: &Scenario, out: &mut JobOutput) -> Result<()> {
    let id = s
        .identify
        .as_ref()
        .ok_or_else(|| CliError::config("identify", "section is required for `identify`"))?;
    let series = match &id.input {
        Some(path) => {
            out.push("source", path.display().to_string());
            read_csv(path)?
        }
        None => {
            out.push("source", "current-fed simulation of the scenario machine");
            let cfg = SimConfig {
                mode: FeedMode::CurrentFed,
                ..s.sim
            };
            run_current_fed(&s.machine, current_command(s), s.operating.omega_e, &cfg)?
        }
    };
    let column = |name: &str| {
        series.channel(name).ok_or_else(|| {
            CliError::Runtime(format!("identification input lacks the `{name}` channel"))
        })
    };
    let (v_d, v_q) = (column("v_d")?, column("v_q")?);
    let (i_d, i_q) = (column("i_d")?, column("i_q")?);
    let i_d0 = constant(i_d, "i_d")?;
    let i_q0 = constant(i_q, "i_q")?;
    let omega = s.operating.omega_e;

    // deviations from the nominal machine described by the scenario
    let nominal = s.nominal();
    let mut dv_d = Vec::with_capacity(series.len());
    let mut dv_q = Vec::with_capacity(series.len());
    for k in 0..series.len() {
        let ideal = ideal_dq_nonsalient(
            &nominal,
            &OperatingPoint::steady(series.theta[k], omega, i_d0, i_q0),
        );
        dv_d.push(v_d[k] - ideal.v_d);
        dv_q.push(v_q[k] - ideal.v_q);
    }
    let result = match id.family {
        Family::Resistance => fit_resistance(&dv_d, &dv_q, i_d0, i_q0, &series.theta)?,
        Family::Flux => fit_flux(&dv_d, &dv_q, omega, &series.theta)?,
    };
    report_identification(s, id.family, &result, out);
    Ok(())
}

/// The fits assume constant dq currents, as produced by a current-fed run.
fn constant(data: &[f64], name: &str) -> Result<f64> {
    let mean = data.iter().sum::<f64>() / data.len().max(1) as f64;
    let spread = data.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread > 1e-9 * mean.abs().max(1.0) {
        return Err(CliError::Runtime(format!(
            "`{name}` varies by {spread:e} A; identification needs constant-current (current-fed) data"
        )));
    }
    Ok(mean)
}

fn report_identification(
    s: &Scenario,
    family: Family,
    r: &IdentificationResult,
    out: &mut JobOutput,
) {
    out.push("family", r.family.name());
    out.push("s", fmt(r.s));
    out.push_phasor("phasor", r.phasor);
    out.push("deviations", triple(r.per_phase));
    out.push("nominal_shift", fmt(r.nominal_shift));
    out.push("fit_residual_rms", fmt(r.fit_residual_rms));

    // with the true machine known, report how far the estimate is from it
    let (actual, base) = match family {
        Family::Resistance => (s.machine.r, s.base.r),
        Family::Flux => (s.machine.lam, s.base.lam),
    };
    let nominal = base.iter().copied().fold(f64::INFINITY, f64::min);
    let injected = actual.map(|v| v - nominal);
    let estimate = r.unshifted();
    let err = (0..3)
        .map(|k| (estimate[k] - injected[k]).abs())
        .fold(0.0, f64::max);
    out.push("scenario_deviations", triple(injected));
    out.push("max_abs_deviation_error", fmt(err));
}
