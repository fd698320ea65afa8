use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::json;

/// A named real or integer result; `null` stands for "not available".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub measurements: Vec<Measurement>,
    pub pass_flags: BTreeMap<String, bool>,
    /// Seconds.
    pub wall_time: f64,
}

impl ExperimentRecord {
    pub fn passed(&self) -> bool {
        self.pass_flags.values().all(|&p| p)
    }

    pub fn measurement(&self, name: &str) -> Option<&Value> {
        self.measurements.iter().find(|m| m.name == name).map(|m| &m.value)
    }

    pub fn to_json(&self) -> String {
        json::to_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("record: {e}")))
    }

    /// One-line summary for stderr.
    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self.pass_flags.iter().filter(|(_, &p)| !p).map(|(k, _)| k.as_str()).collect();
        let status = if failed.is_empty() { "PASS".to_string() } else { format!("FAIL ({})", failed.join(", ")) };
        format!(
            "{} seed={}: {status}, {} checks, {:.3}s",
            self.config.command.name(),
            self.config.seed,
            self.pass_flags.len(),
            self.wall_time
        )
    }
}

/// Ordered measurement list under construction.
#[derive(Clone, Debug, Default)]
pub struct Measurements(pub Vec<Measurement>);

impl Measurements {
    pub fn real(&mut self, name: &str, v: f64) -> &mut Self {
        self.push(name, json::real(v))
    }

    pub fn int(&mut self, name: &str, v: u64) -> &mut Self {
        self.push(name, Value::from(v))
    }

    pub fn opt_real(&mut self, name: &str, v: Option<f64>) -> &mut Self {
        self.push(name, v.map_or(Value::Null, json::real))
    }

    pub fn opt_int(&mut self, name: &str, v: Option<u64>) -> &mut Self {
        self.push(name, v.map_or(Value::Null, Value::from))
    }

    fn push(&mut self, name: &str, value: Value) -> &mut Self {
        self.0.push(Measurement { name: name.to_string(), value });
        self
    }
}
