//! Layered run configuration: built-in defaults, then an optional TOML file,
//! then repeatable `key=value` overrides with dotted paths.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gas::{GasModel, PrimitiveState};
use crate::harness::{ExponentLedger, SweepSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveConfig {
    pub rho_left: f64,
    pub v1_left: f64,
    pub theta_left: f64,
    pub v1_plus: f64,
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self {
            rho_left: 1.0,
            v1_left: 0.0,
            theta_left: 1.0,
            v1_plus: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub eps: f64,
    pub t_final: f64,
    /// Start of the measurement window [h, t_final].
    pub h: f64,
    pub b_exponent: f64,
    pub a1: f64,
    pub a2: f64,
    pub cells_per_delta: usize,
    pub snapshots_per_unit: usize,
    /// Amplitude for the seeded perturbation injector (simulate only).
    pub bump_amplitude: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eps: 1e-2,
            t_final: 1.0,
            h: 0.1,
            b_exponent: 1.0 / 6.0,
            a1: 0.75,
            a2: 0.25,
            cells_per_delta: 64,
            snapshots_per_unit: 20,
            bump_amplitude: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eps_list: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps_list: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub gas: GasModel,
    pub wave: WaveConfig,
    pub run: RunConfig,
    pub sweep: SweepConfig,
}

impl Default for GasModel {
    fn default() -> Self {
        GasModel::air_like()
    }
}

fn parse_toml_value(raw: &str) -> toml::Value {
    // numbers, booleans, arrays, quoted strings; bare words fall back to strings
    if let Ok(v) = raw.parse::<i64>() {
        return toml::Value::Integer(v);
    }
    if let Ok(v) = raw.parse::<f64>() {
        return toml::Value::Float(v);
    }
    if let Ok(v) = raw.parse::<bool>() {
        return toml::Value::Boolean(v);
    }
    if raw.starts_with('[') {
        if let Ok(table) = format!("x = {raw}").parse::<toml::Table>() {
            return table["x"].clone();
        }
    }
    toml::Value::String(raw.trim_matches('"').to_string())
}

fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let mut parts = path.split('.').peekable();
    let mut current = table;
    while let Some(key) = parts.next() {
        if key.is_empty() {
            return Err(Error::Config(format!("empty key segment in '{path}'")));
        }
        if parts.peek().is_none() {
            current.insert(key.to_string(), value);
            return Ok(());
        }
        current = current
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("'{key}' in '{path}' is not a table")))?;
    }
    unreachable!("split always yields at least one segment")
}

impl Config {
    /// Layer defaults, an optional file, and `key=value` overrides.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let defaults = toml::Value::try_from(Config::default())
            .map_err(|e| Error::Config(format!("default config encode: {e}")))?;
        let mut table = defaults
            .as_table()
            .expect("defaults form a table")
            .clone();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            let from_file: toml::Table = text
                .parse()
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            merge(&mut table, &from_file);
        }
        for item in overrides {
            let (key, raw) = item.split_once('=').ok_or_else(|| {
                Error::Config(format!("override '{item}' is not of the form key=value"))
            })?;
            set_path(&mut table, key.trim(), parse_toml_value(raw.trim()))?;
        }
        let config: Config = toml::Value::Table(table)
            .try_into()
            .map_err(|e| Error::Config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.gas.validate()?;
        PrimitiveState::new(self.wave.rho_left, self.wave.v1_left, self.wave.theta_left)
            .map_err(|_| {
                Error::Config(format!(
                    "wave.rho_left/theta_left must be positive, got {}, {}",
                    self.wave.rho_left, self.wave.theta_left
                ))
            })?;
        if self.wave.v1_plus <= self.wave.v1_left {
            return Err(Error::Config(format!(
                "wave.v1_plus must exceed wave.v1_left for a rarefaction, got {} <= {}",
                self.wave.v1_plus, self.wave.v1_left
            )));
        }
        if !(self.run.eps >= 0.0 && self.run.eps < 1.0) {
            return Err(Error::Config(format!(
                "run.eps must lie in [0, 1), got {}",
                self.run.eps
            )));
        }
        if !(self.run.h > 0.0 && self.run.h <= self.run.t_final) {
            return Err(Error::Config(format!(
                "need 0 < run.h <= run.t_final, got {} and {}",
                self.run.h, self.run.t_final
            )));
        }
        self.ledger().validate()?;
        Ok(())
    }

    pub fn left_state(&self) -> PrimitiveState {
        PrimitiveState::new(self.wave.rho_left, self.wave.v1_left, self.wave.theta_left)
            .expect("validated")
    }

    pub fn ledger(&self) -> ExponentLedger {
        ExponentLedger {
            a1: self.run.a1,
            a2: self.run.a2,
            b: self.run.b_exponent,
        }
    }

    pub fn sweep_spec(&self, workers: usize) -> SweepSpec {
        SweepSpec {
            gas: self.gas,
            left: self.left_state(),
            v1_plus: self.wave.v1_plus,
            eps_list: self.sweep.eps_list.clone(),
            ledger: self.ledger(),
            t_final: self.run.t_final,
            h: self.run.h,
            cells_per_delta: self.run.cells_per_delta,
            snapshots_per_unit: self.run.snapshots_per_unit,
            workers,
        }
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        format!("{:x}", hasher.finalize())
    }
}

fn merge(base: &mut toml::Table, layer: &toml::Table) {
    for (key, value) in layer {
        match (base.get_mut(key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(l)) => merge(b, l),
            _ => {
                base.insert(key.clone(), value.clone());
            }
        }
    }
}
