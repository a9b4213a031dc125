//! Experiment configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use zerotemp::bath::BathSpec;
use zerotemp::oscillator::{OscillatorSystem, DEFAULT_DIM};
use zerotemp::state::{cat_state, coherent_state, StateVector};
use zerotemp::units::UnitSystem;
use zerotemp::Complex64;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    pub system: SystemConfig,
    pub bath: BathSpec,
    pub output: OutputConfig,
    #[serde(default)]
    pub units: UnitSystem,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub mass: f64,
    pub omega: f64,
    pub dim: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
            dim: DEFAULT_DIM,
        }
    }
}

impl SystemConfig {
    pub fn build(&self) -> CliResult<OscillatorSystem> {
        Ok(OscillatorSystem::new(self.mass, self.omega, self.dim)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// CSV file name, relative to the output directory.
    pub csv: String,
    /// Metadata file name; defaults to the CSV name with a `.json` suffix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<String>,
}

impl OutputConfig {
    pub fn metadata_name(&self) -> String {
        self.metadata.clone().unwrap_or_else(|| format!("{}.json", self.csv))
    }
}

/// Runs the experiment once per value, substituting each into the dotted
/// `parameter` path of the configuration (e.g. `bath.eta`, `params.t_final`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub values: Vec<Value>,
}

/// Initial oscillator state in the Fock basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Fock {
        n: usize,
    },
    Coherent {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Cat {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl StateConfig {
    pub fn build(&self, dim: usize) -> CliResult<StateVector> {
        let state = match *self {
            StateConfig::Fock { n } => StateVector::basis(dim, n)?,
            StateConfig::Coherent { re, im } => coherent_state(Complex64::new(re, im), dim)?,
            StateConfig::Cat { re, im } => cat_state(Complex64::new(re, im), dim)?,
        };
        Ok(state)
    }
}

/// Reads a configuration file. A metadata sidecar written by a previous run is
/// accepted as well; its `resolved_config` entry is used.
pub fn load(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let value = match value {
        Value::Object(mut map) if map.contains_key("resolved_config") => map.remove("resolved_config").unwrap(),
        other => other,
    };
    from_value(value)
}

pub fn from_value(value: Value) -> CliResult<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_value(value).map_err(|e| CliError::config(e.to_string()))?;
    if !config.params.is_object() {
        return Err(CliError::config("`params` must be an object"));
    }
    config.bath.validate()?;
    config.units.validate()?;
    Ok(config)
}

/// Copy of `config` with `value` written at the dotted `path`.
pub fn substitute(config: &ExperimentConfig, path: &str, value: &Value) -> CliResult<ExperimentConfig> {
    let mut root = serde_json::to_value(config).expect("configuration serializes");
    if let Value::Object(map) = &mut root {
        map.remove("sweep");
    }
    let mut slot = &mut root;
    let mut parts = path.split('.').peekable();
    while let Some(key) = parts.next() {
        let Value::Object(map) = slot else {
            return Err(CliError::config(format!("sweep path `{path}` does not name an object field")));
        };
        if parts.peek().is_none() {
            map.insert(key.to_string(), value.clone());
            break;
        }
        slot = map.entry(key.to_string()).or_insert_with(empty_object);
    }
    from_value(root)
}

/// Deserializes experiment parameters, filling defaults, and returns them
/// together with their fully resolved JSON form.
pub fn parse_params<T>(params: &Value) -> CliResult<(T, Value)>
where
    T: for<'de> Deserialize<'de> + Serialize,
{
    let parsed: T =
        serde_json::from_value(params.clone()).map_err(|e| CliError::config(format!("params: {e}")))?;
    let resolved = serde_json::to_value(&parsed).expect("parameters serialize");
    Ok((parsed, resolved))
}
