//! Run configuration: JSON document plus command-line overrides.

use std::path::{Path, PathBuf};

use aptqfi_core::{Cutoffs, Parameter, SystemParams};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Steady,
    Sensitivity,
    Qfi,
    Sweep,
    Evolve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Steady => "steady",
            Command::Sensitivity => "sensitivity",
            Command::Qfi => "qfi",
            Command::Sweep => "sweep",
            Command::Evolve => "evolve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    /// Grid points from `min` to `max` inclusive; a single point sits at `min`.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        let lerp = |a: f64, b: f64, k: usize| {
            if k == self.count - 1 {
                b
            } else {
                a + (b - a) * k as f64 / last
            }
        };
        match self.spacing {
            Spacing::Linear => (0..self.count).map(|k| lerp(self.min, self.max, k)).collect(),
            Spacing::Log => {
                let (lo, hi) = (self.min.log10(), self.max.log10());
                (0..self.count)
                    .map(|k| if k == self.count - 1 { self.max } else { 10f64.powf(lerp(lo, hi, k)) })
                    .collect()
            }
        }
    }

    fn validate(&self, field: &str) -> Result<(), CliError> {
        if self.count < 1 {
            return Err(CliError::config(format!("{field}.count"), "must be at least 1"));
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(CliError::config(field, "min and max must be finite"));
        }
        if self.min >= self.max {
            return Err(CliError::config(field, format!("min ({}) must be below max ({})", self.min, self.max)));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(CliError::config(format!("{field}.min"), "log spacing requires min > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    /// Fock cutoffs; the coherent-state rule at the steady amplitudes when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Cutoffs>,
    /// Integration horizon in units of 1/Γ; the relaxation time when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Equally spaced output times on `[0, t_end]`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_tol() -> f64 {
    aptqfi_core::EvolveOptions::default().tol
}

fn default_samples() -> usize {
    50
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            cutoffs: None,
            t_end: None,
            tol: default_tol(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    /// Table destination; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// SVG plot destination (sweep only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub params: SystemParams,
    /// Parameter whose sensitivity, information or bound is reported, and
    /// which `grid` scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<Parameter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// ξ = κ/Γ values, one curve each (sweep only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn new(command: Command, params: SystemParams) -> Self {
        Self {
            command,
            params,
            parameter: None,
            grid: None,
            xi: None,
            sim: None,
            output: OutputSpec::default(),
        }
    }

    /// Parses and validates a complete JSON document.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::config("<document>", e.to_string()))?;
        Self::from_value(value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_value(mut value: Value) -> Result<Self, CliError> {
        fill_param_defaults(&mut value)?;
        let config: RunConfig =
            serde_json::from_value(value).map_err(|e| CliError::config("<document>", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// The parameter, or a config error naming the command that needs it.
    pub fn require_parameter(&self) -> Result<Parameter, CliError> {
        self.parameter
            .ok_or_else(|| CliError::config("parameter", format!("required by '{}'", self.command.name())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params
            .validate()
            .map_err(|e| CliError::config("params", e.to_string()))?;
        if let Some(grid) = &self.grid {
            grid.validate("grid")?;
            self.require_parameter()?;
        }
        match self.command {
            Command::Sensitivity | Command::Qfi => {
                self.require_parameter()?;
            }
            Command::Sweep => {
                self.require_parameter()?;
                if self.grid.is_none() {
                    return Err(CliError::config("grid", "required by 'sweep'"));
                }
                let xi = self.xi.as_deref().unwrap_or_default();
                if xi.is_empty() {
                    return Err(CliError::config("xi", "required by 'sweep' and must be non-empty"));
                }
                if xi.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(CliError::config("xi", "values must be finite and >= 0"));
                }
            }
            Command::Spectrum | Command::Steady | Command::Evolve => {}
        }
        if self.command != Command::Sweep && self.xi.is_some() {
            return Err(CliError::config("xi", "only used by 'sweep'"));
        }
        if self.command == Command::Evolve && self.grid.is_some() {
            return Err(CliError::config("grid", "not supported by 'evolve'"));
        }
        if self.output.plot.is_some() && self.command != Command::Sweep {
            return Err(CliError::config("output.plot", "plots are produced by 'sweep' only"));
        }
        if let Some(sim) = &self.sim {
            if self.command != Command::Evolve {
                return Err(CliError::config("sim", "only used by 'evolve'"));
            }
            if !(sim.tol > 0.0 && sim.tol.is_finite()) {
                return Err(CliError::config("sim.tol", "must be finite and > 0"));
            }
            if sim.samples < 2 {
                return Err(CliError::config("sim.samples", "must be at least 2"));
            }
            if let Some(t) = sim.t_end {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(CliError::config("sim.t_end", "must be finite and > 0"));
                }
            }
            if let Some(c) = sim.cutoffs {
                if c.na < 2 || c.nb < 2 {
                    return Err(CliError::config("sim.cutoffs", "each mode needs at least 2 levels"));
                }
            }
        }
        Ok(())
    }
}

/// Completes a partial `params` object with the default system so that
/// single fields can be set from the command line.
fn fill_param_defaults(value: &mut Value) -> Result<(), CliError> {
    let Some(root) = value.as_object_mut() else {
        return Err(CliError::config("<document>", "expected a JSON object"));
    };
    let defaults = serde_json::to_value(SystemParams::default()).expect("params serialize");
    match root.get_mut("params") {
        None => {
            root.insert("params".into(), defaults);
        }
        Some(Value::Object(given)) => {
            if let Value::Object(defaults) = defaults {
                for (k, v) in defaults {
                    given.entry(k).or_insert(v);
                }
            }
        }
        Some(_) => return Err(CliError::config("params", "expected an object")),
    }
    Ok(())
}

/// Sets `path` (dot separated) in `root`, creating intermediate objects.
/// The value is read as JSON when it parses, otherwise as a bare string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(assignment, "expected key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::config(key, "malformed key"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        let Value::Object(map) = node else {
            return Err(CliError::config(key, format!("'{part}' is inside a non-object value")));
        };
        if parts.peek().is_none() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

/// Flag-level overrides applied on top of the optional config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides<'a> {
    pub config: Option<&'a Path>,
    pub set: &'a [String],
    pub out: Option<&'a Path>,
    pub plot: Option<&'a Path>,
    pub format: Option<Format>,
}

/// File first, then `--set` assignments, then the dedicated output flags.
pub fn parse_config(command: Command, flags: &Overrides<'_>) -> Result<RunConfig, CliError> {
    let mut root = match flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::config(path.display().to_string(), e.to_string()))?
        }
        None => Value::Object(Map::new()),
    };
    if !root.is_object() {
        return Err(CliError::config("<document>", "expected a JSON object"));
    }
    root["command"] = Value::String(command.name().into());
    for assignment in flags.set {
        apply_override(&mut root, assignment)?;
    }
    let mut set_output = |key: &str, v: Value| {
        let out = root
            .as_object_mut()
            .expect("checked above")
            .entry("output")
            .or_insert_with(|| Value::Object(Map::new()));
        match out {
            Value::Object(map) => {
                map.insert(key.into(), v);
                Ok(())
            }
            _ => Err(CliError::config("output", "expected an object")),
        }
    };
    if let Some(p) = flags.out {
        set_output("path", Value::String(p.display().to_string()))?;
    }
    if let Some(p) = flags.plot {
        set_output("plot", Value::String(p.display().to_string()))?;
    }
    if let Some(f) = flags.format {
        set_output("format", serde_json::to_value(f).expect("format serializes"))?;
    }
    RunConfig::from_value(root)
}
