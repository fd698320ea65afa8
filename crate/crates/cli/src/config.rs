//! Experiment configuration. A config file is a JSON object whose `params`
//! keys are the long flag names of the command, so a config and the command
//! line it mirrors run the same experiment.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, FromArgMatches, Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;
use crate::invariants;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    GapSearch,
    WitnessAudit,
    DeformCheck,
    DimBounds,
    Reduction,
    Nearcomm,
    Invariants,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::GapSearch => "gap-search",
            CommandKind::WitnessAudit => "witness-audit",
            CommandKind::DeformCheck => "deform-check",
            CommandKind::DimBounds => "dim-bounds",
            CommandKind::Reduction => "reduction",
            CommandKind::Nearcomm => "nearcomm",
            CommandKind::Invariants => "invariants",
        }
    }

    /// Overridable tolerances and their defaults.
    pub fn tolerances(self) -> Vec<(&'static str, f64)> {
        match self {
            CommandKind::GapSearch => vec![("slack", acnum_core::expander::SLACK)],
            CommandKind::WitnessAudit => vec![("slack", acnum_core::witness::SLACK)],
            CommandKind::DeformCheck => vec![("identity", 1e-12), ("norm_identity", 1e-9), ("bound", 1e-9)],
            CommandKind::DimBounds => vec![],
            CommandKind::Reduction => vec![("identity", 1e-10)],
            CommandKind::Nearcomm => vec![("feasible", 1e-10)],
            CommandKind::Invariants => invariants::CHECKS.iter().map(|c| (c.name, c.tolerance)).collect(),
        }
    }

    /// Artifact file extension.
    pub fn extension(self) -> &'static str {
        match self {
            CommandKind::WitnessAudit | CommandKind::DeformCheck | CommandKind::DimBounds | CommandKind::Reduction => "csv",
            _ => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn new(command: CommandKind) -> Self {
        ExperimentConfig { command, params: Map::new(), seed: 0, out: None, record: None, tolerances: BTreeMap::new() }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))
    }

    /// Rejects unknown tolerance keys and negative or non-finite values.
    pub fn validate_tolerances(&self) -> Result<(), CliError> {
        let known = self.command.tolerances();
        for (key, &v) in &self.tolerances {
            if !known.iter().any(|(k, _)| k == key) {
                let names: Vec<&str> = known.iter().map(|(k, _)| *k).collect();
                return Err(CliError::usage(format!(
                    "unknown tolerance `{key}` for {} (known: {})",
                    self.command.name(),
                    if names.is_empty() { "none".to_string() } else { names.join(", ") }
                )));
            }
            if !v.is_finite() || v < 0.0 {
                return Err(CliError::usage(format!("tolerance `{key}` must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances.get(key).copied().unwrap_or_else(|| {
            self.command
                .tolerances()
                .into_iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| v)
                .unwrap_or_else(|| panic!("tolerance `{key}` is not declared for {}", self.command.name()))
        })
    }
}

/// Splits `--tol.key=value` (or `--tol.key value`) out of an argument list.
pub fn extract_tolerances(args: Vec<String>) -> Result<(Vec<String>, BTreeMap<String, f64>), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut tols = BTreeMap::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(spec) = arg.strip_prefix("--tol.") else {
            rest.push(arg);
            continue;
        };
        let (key, value) = match spec.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| CliError::usage(format!("--tol.{spec} needs a value")))?;
                (spec.to_string(), v)
            }
        };
        if key.is_empty() {
            return Err(CliError::usage("empty tolerance name"));
        }
        let v: f64 = value.parse().map_err(|_| CliError::usage(format!("--tol.{key}: `{value}` is not a number")))?;
        tols.insert(key, v);
    }
    Ok((rest, tols))
}

/// The flags a parameter map stands for.
pub fn params_to_argv(params: &Map<String, Value>) -> Result<Vec<String>, CliError> {
    let mut argv = Vec::new();
    for (key, value) in params {
        let flag = format!("--{key}");
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => argv.push(flag),
            Value::Number(n) => {
                argv.push(flag);
                argv.push(n.to_string());
            }
            Value::String(s) => {
                argv.push(flag);
                argv.push(s.clone());
            }
            Value::Array(_) | Value::Object(_) => {
                return Err(CliError::usage(format!("parameter `{key}` must be a scalar")));
            }
        }
    }
    Ok(argv)
}

#[derive(Parser)]
#[command(no_binary_name = true, disable_help_flag = true)]
struct ParamsOnly<T: Args> {
    #[command(flatten)]
    params: T,
}

/// Parses and validates a parameter map with the same rules as the flags.
pub fn parse_params<T: Args + FromArgMatches>(kind: CommandKind, params: &Map<String, Value>) -> Result<T, CliError> {
    let argv = params_to_argv(params)?;
    ParamsOnly::<T>::try_parse_from(argv)
        .map(|p| p.params)
        .map_err(|e| CliError::usage(format!("{}: {}", kind.name(), e.render().to_string().trim())))
}

/// Flag values as a parameter map.
pub fn params_to_map<T: Serialize>(params: &T) -> Map<String, Value> {
    match serde_json::to_value(params).expect("parameter structs serialize") {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

#[derive(Args, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GapSearchParams {
    /// Dimension of the candidate unitaries.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Acceptance threshold is `2 sqrt 2 + 2 eps`.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Maximum number of Haar trials.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Random samples for checking the emitted certificate (0 skips the check).
    #[arg(long, default_value_t = 1000)]
    pub check_samples: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct WitnessAuditParams {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub t: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DeformCheckParams {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub t: f64,
    /// Random matrices per check.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DimBoundsParams {
    #[arg(long, default_value_t = 0.2)]
    pub t: f64,
    #[arg(long, default_value_t = 0.03125)]
    pub eps: f64,
    /// Last n written to the table.
    #[arg(long, default_value_t = 400)]
    pub nmax: usize,
    /// Upper end of the scan for the first crossing.
    #[arg(long, default_value_t = 10_000_000)]
    pub search_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReductionMode {
    F2,
    F3,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ReductionParams {
    /// Number of U inputs.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Number of V inputs.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Witness size (inputs act on `M_{2^n} ⊗ M_{2^n}`), or the input dimension with `--haar`.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = ReductionMode::F3)]
    pub mode: ReductionMode,
    /// Use seeded Haar unitaries of dimension n instead of witness generators.
    #[arg(long)]
    pub haar: bool,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct NearcommParams {
    /// CMAT2 file holding the pair (A, B).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize)]
pub struct NoParams {}
