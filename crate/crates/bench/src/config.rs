//! Experiment configuration: a flat TOML document whose keys mirror the
//! fields of [`SimConfig`], plus a few experiment-level keys.

use std::path::PathBuf;

use gmd_precoding::link::SimConfig;
use gmd_precoding::Scheme;
use serde::Serialize;
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("invalid value for '{key}': {msg}")]
    InvalidValue { key: String, msg: String },
    #[error("constraint violated: {0}")]
    Constraint(String),
}

/// Keys accepted in a config document or a `--set` override.
pub const KNOWN_KEYS: &[&str] = &[
    "name",
    "output_path",
    "ci_target",
    "n_t",
    "n_r",
    "n_rf",
    "n_s",
    "n_paths",
    "L",
    "spacing",
    "snr_db_grid",
    "schemes",
    "channels_per_point",
    "symbols_per_channel",
    "master_seed",
];

/// A named sweep with its output location.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub config: SimConfig,
    pub output_path: PathBuf,
    /// Relative half-width of the 95% confidence interval at which a point
    /// may stop before its trial budget.
    pub ci_target: Option<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            name: "default".into(),
            config: SimConfig::default(),
            output_path: PathBuf::from("ber.csv"),
            ci_target: None,
        }
    }
}

impl ExperimentSpec {
    /// 128×16 link, SNR −10..4 dB.
    pub fn fig3() -> Self {
        Self { name: "fig3".into(), output_path: "fig3.csv".into(), ..Self::default() }
    }

    /// 256×16 link over a grid wide enough to reach BER 1e-3 on every scheme.
    pub fn fig4() -> Self {
        let config = SimConfig {
            n_t: 256,
            snr_db_grid: (0..24).map(|i| -10.0 + 2.0 * i as f64).collect(),
            ..SimConfig::default()
        };
        Self { name: "fig4".into(), config, output_path: "fig4.csv".into(), ci_target: None }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.trim().is_empty() {
            return Err(ConfigError::Constraint("name must not be empty".into()));
        }
        if let Some(t) = self.ci_target {
            if !(t > 0.0 && t < 1.0) {
                return Err(ConfigError::Constraint(format!("ci_target must lie in (0, 1), got {t}")));
            }
        }
        self.config.validate().map_err(|e| ConfigError::Constraint(e.to_string()))
    }

    /// Applies one key/value pair.
    pub fn set(&mut self, key: &str, value: &Value) -> Result<(), ConfigError> {
        let cfg = &mut self.config;
        match key {
            "name" => self.name = as_string(key, value)?,
            "output_path" => self.output_path = PathBuf::from(as_string(key, value)?),
            "ci_target" => self.ci_target = Some(as_float(key, value)?),
            "n_t" => cfg.n_t = as_usize(key, value)?,
            "n_r" => cfg.n_r = as_usize(key, value)?,
            "n_rf" => cfg.n_rf = as_usize(key, value)?,
            "n_s" => cfg.n_s = as_usize(key, value)?,
            "n_paths" | "L" => cfg.n_paths = as_usize(key, value)?,
            "spacing" => cfg.spacing = as_float(key, value)?,
            "snr_db_grid" => {
                cfg.snr_db_grid = as_array(key, value)?.iter().map(|v| as_float(key, v)).collect::<Result<_, _>>()?
            }
            "schemes" => {
                cfg.schemes = as_array(key, value)?
                    .iter()
                    .map(|v| {
                        as_string(key, v)?
                            .parse::<Scheme>()
                            .map_err(|e| invalid(key, e.to_string()))
                    })
                    .collect::<Result<_, _>>()?
            }
            "channels_per_point" => cfg.channels_per_point = as_u64(key, value)?,
            "symbols_per_channel" => cfg.symbols_per_channel = as_u64(key, value)?,
            "master_seed" => cfg.master_seed = as_u64(key, value)?,
            other => return Err(ConfigError::UnknownKeys(vec![other.to_string()])),
        }
        Ok(())
    }

    /// Applies a `key=value` override; the value uses TOML syntax, with bare
    /// words taken as strings.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax(format!("expected key=value, got '{assignment}'")))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKeys(vec![key.to_string()]));
        }
        let raw = raw.trim();
        let value = match format!("v = {raw}").parse::<Table>() {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => Value::String(raw.to_string()),
        };
        self.set(key, &value)?;
        self.validate()
    }
}

/// Parses and validates a config document. Missing keys keep their
/// defaults (the 128×16 reference link).
pub fn parse_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    let unknown: Vec<String> = table.keys().filter(|k| !KNOWN_KEYS.contains(&k.as_str())).cloned().collect();
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }
    let mut spec = ExperimentSpec::default();
    for (key, value) in &table {
        spec.set(key, value)?;
    }
    spec.validate()?;
    Ok(spec)
}

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_string(), msg: msg.into() }
}

fn as_string(key: &str, v: &Value) -> Result<String, ConfigError> {
    v.as_str().map(str::to_string).ok_or_else(|| invalid(key, format!("expected a string, got {v}")))
}

fn as_float(key: &str, v: &Value) -> Result<f64, ConfigError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(invalid(key, format!("expected a number, got {v}"))),
    }
}

fn as_u64(key: &str, v: &Value) -> Result<u64, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(invalid(key, format!("expected a nonnegative integer, got {v}"))),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize, ConfigError> {
    as_u64(key, v).map(|x| x as usize)
}

fn as_array<'a>(key: &str, v: &'a Value) -> Result<&'a Vec<Value>, ConfigError> {
    v.as_array().ok_or_else(|| invalid(key, format!("expected an array, got {v}")))
}
