//! TOML scenario files.
//!
//! ```toml
//! [machine]
//! pole_pairs = 4
//! r = 0.1          # per-phase value for all phases; r_a, r_b, r_c override
//! l = 1.5e-4       # l_a, l_b, l_c
//! m = 5e-5         # m_ab, m_bc, m_ca
//! lam = 0.05       # lam_a, lam_b, lam_c
//!
//! [imbalance]      # fractional deviations on top of [machine]
//! r = [0.05, 0.0, 0.0]
//!
//! [operating]
//! omega_e = 500.0
//! i_q = 10.0
//!
//! [sim]
//! dt = 1e-6
//! duration = 0.02
//! mode = "current"      # or "voltage"
//! neutral = "isolated"  # or "driven"
//!
//! [output]
//! channels = ["i_d", "i_q"]
//! stride = 10
//!
//! [identify]
//! family = "resistance"  # or "flux"
//! input = "simulate.csv"
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use pmsm_imbalance::sim::CHANNELS;
use pmsm_imbalance::{
    Error as ModelError, FeedMode, MachineParameters, Neutral, NonSalientDq, SimConfig,
};
use toml::{Table, Value};

use crate::error::{CliError, Result};

const PHASES: [&str; 3] = ["a", "b", "c"];
const PAIRS: [&str; 3] = ["ab", "bc", "ca"];
const SECTIONS: [&str; 6] = [
    "machine",
    "imbalance",
    "operating",
    "sim",
    "output",
    "identify",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Resistance,
    Flux,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operating {
    pub omega_e: f64,
    pub i_d: f64,
    pub i_q: f64,
    pub i_0: f64,
    pub v_d: Option<f64>,
    pub v_q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub channels: Vec<String>,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identify {
    pub family: Family,
    /// Resolved against the scenario file's directory.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Effective parameters, imbalance included.
    pub machine: MachineParameters,
    /// The machine as described before `[imbalance]` is applied.
    pub base: MachineParameters,
    pub operating: Operating,
    pub sim: SimConfig,
    pub output: Output,
    pub identify: Option<Identify>,
    /// Sections that appeared in the file.
    pub sections: BTreeSet<String>,
    /// Keys that fell back to a default.
    pub defaulted: Vec<String>,
}

impl Scenario {
    /// Min-per-family nominal machine of the base description.
    pub fn nominal(&self) -> NonSalientDq {
        pmsm_imbalance::decompose(&self.base).nominal_dq(self.base.pole_pairs)
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains(name)
    }

    /// Every resolved value, one `(key, value)` pair each.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let p = &self.machine;
        for (name, values, labels) in [
            ("r", p.r, PHASES),
            ("l", p.l, PHASES),
            ("m", p.m, PAIRS),
            ("lam", p.lam, PHASES),
        ] {
            for (label, v) in labels.iter().zip(values) {
                out.push((format!("machine.{name}_{label}"), fmt(v)));
            }
        }
        out.push(("machine.pole_pairs".into(), p.pole_pairs.to_string()));
        let op = &self.operating;
        out.push(("operating.omega_e".into(), fmt(op.omega_e)));
        out.push(("operating.i_d".into(), fmt(op.i_d)));
        out.push(("operating.i_q".into(), fmt(op.i_q)));
        out.push(("operating.i_0".into(), fmt(op.i_0)));
        if let Some(v) = op.v_d {
            out.push(("operating.v_d".into(), fmt(v)));
        }
        if let Some(v) = op.v_q {
            out.push(("operating.v_q".into(), fmt(v)));
        }
        out.push(("sim.dt".into(), fmt(self.sim.dt)));
        out.push(("sim.duration".into(), fmt(self.sim.duration)));
        let mode = match self.sim.mode {
            FeedMode::CurrentFed => "current",
            FeedMode::VoltageFed => "voltage",
        };
        out.push(("sim.mode".into(), mode.into()));
        let neutral = match self.sim.neutral {
            Neutral::Isolated => "isolated",
            Neutral::Driven => "driven",
        };
        out.push(("sim.neutral".into(), neutral.into()));
        out.push(("output.channels".into(), self.output.channels.join(",")));
        out.push(("output.stride".into(), self.output.stride.to_string()));
        if let Some(id) = &self.identify {
            let family = match id.family {
                Family::Resistance => "resistance",
                Family::Flux => "flux",
            };
            out.push(("identify.family".into(), family.into()));
            if let Some(path) = &id.input {
                out.push(("identify.input".into(), path.display().to_string()));
            }
        }
        for (key, value) in &mut out {
            if self.defaulted.iter().any(|d| d == key) {
                value.push_str(" (default)");
            }
        }
        out
    }
}

pub(crate) fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base_dir = path.parent().unwrap_or(Path::new(""));
    parse_scenario_str(&text, base_dir)
}

/// Parses scenario text; relative paths are resolved against `base_dir`.
pub fn parse_scenario_str(text: &str, base_dir: &Path) -> Result<Scenario> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::config("scenario", e.message().to_string()))?;
    for key in root.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(CliError::config(key, "unknown section"));
        }
    }
    let mut defaulted = Vec::new();
    let sections: BTreeSet<String> = root.keys().cloned().collect();

    let empty = Table::new();
    let machine_t = section(&root, "machine")?
        .ok_or_else(|| CliError::config("machine", "section is required"))?;
    let base = parse_machine(machine_t)?;
    let imbalance_t = section(&root, "imbalance")?.unwrap_or(&empty);
    let machine = apply_imbalance(&base, imbalance_t)?;
    validate_machine(&machine, imbalance_t)?;

    let operating_t = section(&root, "operating")?
        .ok_or_else(|| CliError::config("operating", "section is required"))?;
    let operating = parse_operating(operating_t, &mut defaulted)?;

    let sim_t = section(&root, "sim")?.unwrap_or(&empty);
    let sim = parse_sim(sim_t, operating.omega_e, &mut defaulted)?;
    if sim.mode == FeedMode::VoltageFed {
        for key in ["v_d", "v_q"] {
            if !operating_t.contains_key(key) {
                return Err(CliError::config(
                    format!("operating.{key}"),
                    "required when sim.mode = \"voltage\"",
                ));
            }
        }
    }

    let output_t = section(&root, "output")?.unwrap_or(&empty);
    let output = parse_output(output_t, &mut defaulted)?;

    let identify = match section(&root, "identify")? {
        Some(t) => Some(parse_identify(t, base_dir)?),
        None => None,
    };

    Ok(Scenario {
        machine,
        base,
        operating,
        sim,
        output,
        identify,
        sections,
        defaulted,
    })
}

fn section<'a>(root: &'a Table, name: &str) -> Result<Option<&'a Table>> {
    match root.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(CliError::config(name, "expected a table")),
    }
}

fn check_keys(table: &Table, prefix: &str, allowed: &[&str]) -> Result<()> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(CliError::config(format!("{prefix}.{key}"), "unknown key"));
        }
    }
    Ok(())
}

fn number(table: &Table, prefix: &str, key: &str) -> Result<Option<f64>> {
    let full = || format!("{prefix}.{key}");
    let v = match table.get(key) {
        None => return Ok(None),
        Some(Value::Float(f)) => *f,
        Some(Value::Integer(i)) => *i as f64,
        Some(other) => {
            return Err(CliError::config(
                full(),
                format!("expected a number, got {}", other.type_str()),
            ))
        }
    };
    if !v.is_finite() {
        return Err(CliError::config(
            full(),
            format!("must be finite (got {v})"),
        ));
    }
    Ok(Some(v))
}

fn string<'a>(table: &'a Table, prefix: &str, key: &str) -> Result<Option<&'a str>> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(CliError::config(
            format!("{prefix}.{key}"),
            format!("expected a string, got {}", other.type_str()),
        )),
    }
}

fn machine_keys() -> Vec<String> {
    let mut keys = vec!["pole_pairs".to_string()];
    for (name, labels) in [("r", PHASES), ("l", PHASES), ("m", PAIRS), ("lam", PHASES)] {
        keys.push(name.to_string());
        keys.extend(labels.iter().map(|s| format!("{name}_{s}")));
    }
    keys
}

fn parse_machine(t: &Table) -> Result<MachineParameters> {
    let keys = machine_keys();
    let allowed: Vec<&str> = keys.iter().map(String::as_str).collect();
    check_keys(t, "machine", &allowed)?;

    let family = |name: &str, labels: [&str; 3], check: fn(f64) -> Option<&'static str>| {
        let shared = number(t, "machine", name)?;
        let mut out = [0.0; 3];
        for (slot, label) in out.iter_mut().zip(labels) {
            let key = format!("{name}_{label}");
            let (v, used) = match number(t, "machine", &key)? {
                Some(v) => (v, key),
                None => match shared {
                    Some(v) => (v, name.to_string()),
                    None => {
                        return Err(CliError::config(
                            format!("machine.{key}"),
                            format!("missing (set machine.{name} or machine.{key})"),
                        ))
                    }
                },
            };
            if let Some(reason) = check(v) {
                return Err(CliError::config(
                    format!("machine.{used}"),
                    format!("{reason} (got {v})"),
                ));
            }
            *slot = v;
        }
        Ok(out)
    };
    let r = family("r", PHASES, |v| {
        (v <= 0.0).then_some("resistance must be positive")
    })?;
    let l = family("l", PHASES, |v| {
        (v <= 0.0).then_some("self-inductance must be positive")
    })?;
    let m = family("m", PAIRS, |_| None)?;
    let lam = family("lam", PHASES, |v| {
        (v < 0.0).then_some("flux linkage must be non-negative")
    })?;

    let pole_pairs = match t.get("pole_pairs") {
        None => return Err(CliError::config("machine.pole_pairs", "missing")),
        Some(Value::Integer(p)) if *p > 0 && *p <= u32::MAX as i64 => *p as u32,
        Some(Value::Integer(p)) => {
            return Err(CliError::config(
                "machine.pole_pairs",
                format!("must be a positive integer (got {p})"),
            ))
        }
        Some(other) => {
            return Err(CliError::config(
                "machine.pole_pairs",
                format!("expected an integer, got {}", other.type_str()),
            ))
        }
    };
    Ok(MachineParameters {
        r,
        l,
        m,
        lam,
        pole_pairs,
    })
}

fn apply_imbalance(base: &MachineParameters, t: &Table) -> Result<MachineParameters> {
    check_keys(t, "imbalance", &["r", "l", "m", "lam"])?;
    let triple = |key: &str| -> Result<[f64; 3]> {
        let full = format!("imbalance.{key}");
        let Some(v) = t.get(key) else {
            return Ok([0.0; 3]);
        };
        let arr = v
            .as_array()
            .ok_or_else(|| CliError::config(&full, "expected an array of three numbers"))?;
        if arr.len() != 3 {
            return Err(CliError::config(
                &full,
                format!("expected three entries, got {}", arr.len()),
            ));
        }
        let mut out = [0.0; 3];
        for (slot, item) in out.iter_mut().zip(arr) {
            *slot = match item {
                Value::Float(f) => *f,
                Value::Integer(i) => *i as f64,
                _ => return Err(CliError::config(&full, "entries must be numbers")),
            };
            if !slot.is_finite() {
                return Err(CliError::config(&full, "entries must be finite"));
            }
        }
        Ok(out)
    };
    let scale = |values: [f64; 3], frac: [f64; 3]| [0, 1, 2].map(|k| values[k] * (1.0 + frac[k]));
    Ok(MachineParameters {
        r: scale(base.r, triple("r")?),
        l: scale(base.l, triple("l")?),
        m: scale(base.m, triple("m")?),
        lam: scale(base.lam, triple("lam")?),
        pole_pairs: base.pole_pairs,
    })
}

fn validate_machine(machine: &MachineParameters, imbalance: &Table) -> Result<()> {
    match machine.validate() {
        Ok(()) => Ok(()),
        Err(ModelError::InvalidParameter { field, reason }) => {
            let family = field.split('_').next().unwrap_or("");
            let key = if imbalance.contains_key(family) {
                format!("imbalance.{family}")
            } else {
                format!("machine.{field}")
            };
            Err(CliError::config(key, reason))
        }
        Err(ModelError::NotPositiveDefinite) => Err(CliError::config(
            "machine.m",
            "inductance matrix is not positive definite",
        )),
        Err(e) => Err(CliError::config("machine", e.to_string())),
    }
}

fn parse_operating(t: &Table, defaulted: &mut Vec<String>) -> Result<Operating> {
    check_keys(
        t,
        "operating",
        &["omega_e", "i_d", "i_q", "i_0", "v_d", "v_q"],
    )?;
    let omega_e = number(t, "operating", "omega_e")?
        .ok_or_else(|| CliError::config("operating.omega_e", "missing"))?;
    let mut current = |key: &str| -> Result<f64> {
        Ok(match number(t, "operating", key)? {
            Some(v) => v,
            None => {
                defaulted.push(format!("operating.{key}"));
                0.0
            }
        })
    };
    Ok(Operating {
        omega_e,
        i_d: current("i_d")?,
        i_q: current("i_q")?,
        i_0: current("i_0")?,
        v_d: number(t, "operating", "v_d")?,
        v_q: number(t, "operating", "v_q")?,
    })
}

fn parse_sim(t: &Table, omega_e: f64, defaulted: &mut Vec<String>) -> Result<SimConfig> {
    check_keys(t, "sim", &["dt", "duration", "mode", "neutral"])?;
    let mut cfg = SimConfig::default();
    match number(t, "sim", "dt")? {
        Some(v) if v <= 0.0 => {
            return Err(CliError::config(
                "sim.dt",
                format!("must be positive (got {v})"),
            ))
        }
        Some(v) => cfg.dt = v,
        None => defaulted.push("sim.dt".into()),
    }
    match number(t, "sim", "duration")? {
        Some(v) if v < cfg.dt => {
            return Err(CliError::config(
                "sim.duration",
                format!("must be at least sim.dt = {} (got {v})", cfg.dt),
            ))
        }
        Some(v) => cfg.duration = v,
        None => defaulted.push("sim.duration".into()),
    }
    match string(t, "sim", "mode")? {
        Some("current") => cfg.mode = FeedMode::CurrentFed,
        Some("voltage") => cfg.mode = FeedMode::VoltageFed,
        Some(other) => {
            return Err(CliError::config(
                "sim.mode",
                format!("expected \"current\" or \"voltage\", got \"{other}\""),
            ))
        }
        None => defaulted.push("sim.mode".into()),
    }
    match string(t, "sim", "neutral")? {
        Some("isolated") => cfg.neutral = Neutral::Isolated,
        Some("driven") => cfg.neutral = Neutral::Driven,
        Some(other) => {
            return Err(CliError::config(
                "sim.neutral",
                format!("expected \"isolated\" or \"driven\", got \"{other}\""),
            ))
        }
        None => defaulted.push("sim.neutral".into()),
    }
    cfg.validate(omega_e).map_err(|e| match e {
        ModelError::Config(msg) => CliError::config("sim.dt", msg),
        other => CliError::config("sim", other.to_string()),
    })?;
    Ok(cfg)
}

fn parse_output(t: &Table, defaulted: &mut Vec<String>) -> Result<Output> {
    check_keys(t, "output", &["channels", "stride"])?;
    let channels = match t.get("channels") {
        None => {
            defaulted.push("output.channels".into());
            CHANNELS.iter().map(|s| s.to_string()).collect()
        }
        Some(Value::Array(items)) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                let name = item.as_str().ok_or_else(|| {
                    CliError::config("output.channels", "entries must be strings")
                })?;
                if !CHANNELS.contains(&name) {
                    return Err(CliError::config(
                        "output.channels",
                        format!(
                            "unknown channel \"{name}\" (known: {})",
                            CHANNELS.join(", ")
                        ),
                    ));
                }
                out.push(name.to_string());
            }
            if out.is_empty() {
                return Err(CliError::config("output.channels", "must not be empty"));
            }
            out
        }
        Some(_) => return Err(CliError::config("output.channels", "expected an array")),
    };
    let stride = match t.get("stride") {
        None => {
            defaulted.push("output.stride".into());
            1
        }
        Some(Value::Integer(s)) if *s >= 1 => *s as usize,
        Some(_) => {
            return Err(CliError::config(
                "output.stride",
                "must be a positive integer",
            ))
        }
    };
    Ok(Output { channels, stride })
}

fn parse_identify(t: &Table, base_dir: &Path) -> Result<Identify> {
    check_keys(t, "identify", &["family", "input"])?;
    let family = match string(t, "identify", "family")? {
        Some("resistance") => Family::Resistance,
        Some("flux") => Family::Flux,
        Some(other) => {
            return Err(CliError::config(
                "identify.family",
                format!("expected \"resistance\" or \"flux\", got \"{other}\""),
            ))
        }
        None => return Err(CliError::config("identify.family", "missing")),
    };
    let input = string(t, "identify", "input")?.map(|s| base_dir.join(s));
    Ok(Identify { family, input })
}
