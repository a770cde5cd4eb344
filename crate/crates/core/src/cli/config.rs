//! Flat `key = value` configuration with command-line overrides.
//!
//! Precedence is flag > file > built-in default. Every effective value keeps
//! its provenance so summaries and CSV headers can say where it came from.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::analysis::SweepConfig;
use crate::channel::{self, ChannelParams};
use crate::error::ModelError;
use crate::keyrate::Scenario;
use crate::source_model::InterferometerParams;

/// Configuration keys in canonical order.
pub const KEYS: [&str; 14] = [
    "mu",
    "nu",
    "alpha_db_per_km",
    "eta_bob",
    "y0",
    "e_det",
    "e0",
    "f_ec",
    "q_sift",
    "d_min_km",
    "d_max_km",
    "step_km",
    "scenarios",
    "output",
];

/// Built-in default and its provenance note, `None` for `output`.
fn builtin_default(key: &str) -> Option<(String, &'static str)> {
    let num = |x: f64| x.to_string();
    let entry = match key {
        "mu" => (num(0.4), "fig3-setting"),
        "nu" => (num(0.067), "fig3-setting"),
        "alpha_db_per_km" => (num(channel::GYS_ALPHA_DB_PER_KM), "gys-default"),
        "eta_bob" => (num(channel::GYS_ETA_BOB), "gys-default"),
        "y0" => (num(channel::GYS_Y0), "gys-default"),
        "e_det" => (num(channel::GYS_E_DET), "gys-default"),
        "e0" => (num(channel::DARK_COUNT_ERROR), "dark-counts-random"),
        "f_ec" => (num(channel::DEFAULT_F_EC), "decoy-method-default"),
        "q_sift" => (num(channel::DEFAULT_Q_SIFT), "decoy-method-default"),
        "d_min_km" => (num(0.0), "builtin"),
        "d_max_km" => (num(250.0), "builtin"),
        "step_km" => (num(1.0), "builtin"),
        "scenarios" => (
            Scenario::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(","),
            "builtin",
        ),
        _ => return None,
    };
    Some(entry)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eval,
    Sweep,
    MaxDist,
    Optimize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Sweep => "sweep",
            Command::MaxDist => "maxdist",
            Command::Optimize => "optimize",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eval" => Ok(Command::Eval),
            "sweep" => Ok(Command::Sweep),
            "maxdist" => Ok(Command::MaxDist),
            "optimize" => Ok(Command::Optimize),
            other => Err(format!("unknown command '{other}' (expected eval, sweep, maxdist or optimize)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Default(&'static str),
    File,
    Flag,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Default(note) => f.write_str(note),
            Provenance::File => f.write_str("file"),
            Provenance::Flag => f.write_str("flag"),
        }
    }
}

/// One effective key with its raw value and origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub key: &'static str,
    pub value: String,
    pub provenance: Provenance,
}

/// Values given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<String>,
    pub values: Vec<(String, String)>,
}

impl Overrides {
    pub fn set(mut self, key: &str, value: impl Into<String>) -> Self {
        self.values.push((key.to_string(), value.into()));
        self
    }

    pub fn command(mut self, command: &str) -> Self {
        self.command = Some(command.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

/// Every problem found in one configuration pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl ConfigError {
    pub fn mentions(&self, key: &str) -> bool {
        self.issues.iter().any(|i| i.key == key)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration ({} problem(s))", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "\n  {}: {}", issue.key, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub interferometer: InterferometerParams,
    pub channel: ChannelParams,
    pub scenarios: Vec<Scenario>,
    /// Distance range; `d_min_km` is also the evaluation distance of
    /// `eval`/`optimize` and the bracket of `maxdist`.
    pub sweep: SweepConfig,
    pub output_path: Option<PathBuf>,
    pub settings: Vec<Setting>,
}

impl RunConfig {
    /// `key = value  (provenance)` for every effective key.
    pub fn summary_lines(&self) -> Vec<String> {
        self.settings
            .iter()
            .map(|s| format!("{} = {}  ({})", s.key, s.value, s.provenance))
            .collect()
    }
}

fn split_line(line: &str) -> Option<Result<(&str, &str), String>> {
    let content = line.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return None;
    }
    Some(match content.split_once('=') {
        Some((k, v)) => Ok((k.trim(), v.trim())),
        None => Err(format!("expected 'key = value', found '{content}'")),
    })
}

fn canonical_key(key: &str) -> Option<&'static str> {
    let normalized = key.trim().trim_start_matches("--").replace('-', "_");
    KEYS.iter().copied().find(|k| *k == normalized)
}

struct Collector {
    issues: Vec<ConfigIssue>,
}

impl Collector {
    fn push(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            key: key.into(),
            message: message.into(),
        });
    }

    fn number(&mut self, settings: &[Setting], key: &'static str) -> Option<f64> {
        let raw = &settings.iter().find(|s| s.key == key)?.value;
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.push(key, format!("cannot parse '{raw}' as a finite number"));
                None
            }
        }
    }

    fn probability(&mut self, settings: &[Setting], key: &'static str) -> Option<f64> {
        let v = self.number(settings, key)?;
        if (0.0..=1.0).contains(&v) {
            Some(v)
        } else {
            self.push(key, format!("{v} is not a probability in [0, 1]"));
            None
        }
    }
}

/// Merges file contents, overrides and defaults into a validated [`RunConfig`].
pub fn parse_config(file_contents: &str, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut c = Collector { issues: Vec::new() };
    let mut settings: Vec<Setting> = KEYS
        .iter()
        .filter_map(|&key| {
            builtin_default(key).map(|(value, note)| Setting {
                key,
                value,
                provenance: Provenance::Default(note),
            })
        })
        .collect();

    let assign = |settings: &mut Vec<Setting>, key: &'static str, value: &str, provenance| {
        let value = value.to_string();
        match settings.iter_mut().find(|s| s.key == key) {
            Some(s) => {
                s.value = value;
                s.provenance = provenance;
            }
            None => settings.push(Setting { key, value, provenance }),
        }
    };

    for (lineno, line) in file_contents.lines().enumerate() {
        match split_line(line) {
            None => {}
            Some(Err(msg)) => c.push(format!("line {}", lineno + 1), msg),
            Some(Ok((key, value))) => match canonical_key(key) {
                Some(k) => assign(&mut settings, k, value, Provenance::File),
                None => c.push(key, "unknown key"),
            },
        }
    }
    for (key, value) in &overrides.values {
        match canonical_key(key) {
            Some(k) => assign(&mut settings, k, value, Provenance::Flag),
            None => c.push(key.as_str(), "unknown key"),
        }
    }
    settings.sort_by_key(|s| KEYS.iter().position(|k| *k == s.key));

    let command = match overrides.command.as_deref() {
        None => {
            c.push("command", "missing command");
            None
        }
        Some(raw) => match raw.parse::<Command>() {
            Ok(cmd) => Some(cmd),
            Err(msg) => {
                c.push("command", msg);
                None
            }
        },
    };

    let mu = c.number(&settings, "mu");
    let nu = c.number(&settings, "nu");
    let interferometer = match (mu, nu) {
        (Some(mu), Some(nu)) => match InterferometerParams::new(mu, nu) {
            Ok(p) => Some(p),
            Err(ModelError::NuExceedsMu { mu, nu }) => {
                c.push("nu", format!("nu exceeds mu ({nu} > {mu})"));
                None
            }
            Err(ModelError::NegativeVacuum { excess }) => {
                c.push("mu", format!("mu - nu = {excess} exceeds 1; no virtual source exists"));
                None
            }
            Err(ModelError::InvalidParameter { name, reason }) => {
                c.push(name, reason);
                None
            }
            Err(other) => {
                c.push("mu", other.to_string());
                None
            }
        },
        _ => None,
    };

    let alpha = c.number(&settings, "alpha_db_per_km");
    if let Some(a) = alpha.filter(|a| *a <= 0.0) {
        c.push("alpha_db_per_km", format!("{a} must be positive"));
    }
    let eta_bob = c.probability(&settings, "eta_bob");
    let y0 = c.probability(&settings, "y0");
    let e_det = c.probability(&settings, "e_det");
    let e0 = c.probability(&settings, "e0");
    let q_sift = c.probability(&settings, "q_sift");
    let f_ec = c.number(&settings, "f_ec");
    if let Some(f) = f_ec.filter(|f| *f < 1.0) {
        c.push("f_ec", format!("{f} must be >= 1"));
    }

    let d_min = c.number(&settings, "d_min_km");
    let d_max = c.number(&settings, "d_max_km");
    let step = c.number(&settings, "step_km");
    if let Some(d) = d_min.filter(|d| *d < 0.0) {
        c.push("d_min_km", format!("{d} must be non-negative"));
    }
    if let (Some(lo), Some(hi)) = (d_min, d_max) {
        if hi < lo {
            c.push("d_max_km", format!("{hi} is below d_min_km ({lo})"));
        }
    }
    if let Some(s) = step.filter(|s| *s <= 0.0) {
        c.push("step_km", format!("{s} must be positive"));
    }

    let raw_scenarios = settings
        .iter()
        .find(|s| s.key == "scenarios")
        .map(|s| s.value.clone())
        .unwrap_or_default();
    let mut scenarios = Vec::new();
    for name in raw_scenarios.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        match name.parse::<Scenario>() {
            Ok(s) if !scenarios.contains(&s) => scenarios.push(s),
            Ok(_) => {}
            Err(msg) => c.push("scenarios", msg),
        }
    }
    if scenarios.is_empty() && !c.issues.iter().any(|i| i.key == "scenarios") {
        c.push("scenarios", "at least one scenario is required");
    }
    scenarios.sort();

    let output_path = settings
        .iter()
        .find(|s| s.key == "output")
        .map(|s| PathBuf::from(&s.value));

    if !c.issues.is_empty() {
        return Err(ConfigError { issues: c.issues });
    }

    // All fields parsed and range-checked above.
    let channel = ChannelParams {
        alpha_db_per_km: alpha.unwrap(),
        distance_km: d_min.unwrap(),
        eta_bob: eta_bob.unwrap(),
        y0: y0.unwrap(),
        e_det: e_det.unwrap(),
        e0: e0.unwrap(),
        f_ec: f_ec.unwrap(),
        q_sift: q_sift.unwrap(),
    };
    let interferometer = interferometer.unwrap();
    let sweep = SweepConfig {
        d_min_km: d_min.unwrap(),
        d_max_km: d_max.unwrap(),
        step_km: step.unwrap(),
        scenarios: scenarios.clone(),
        params: interferometer,
        channel,
    };
    if let Err(e) = sweep.validate() {
        return Err(ConfigError {
            issues: vec![ConfigIssue {
                key: "config".to_string(),
                message: e.to_string(),
            }],
        });
    }

    Ok(RunConfig {
        command: command.unwrap(),
        interferometer,
        channel,
        scenarios,
        sweep,
        output_path,
        settings,
    })
}
