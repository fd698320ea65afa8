//! Cartesian parameter sweeps, run in parallel.

use rayon::prelude::*;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiments::{execute, Outcome};

/// A `key=value` parameter override; the value is read as JSON when it
/// parses, otherwise as a string.
pub fn parse_assignment(spec: &str) -> Result<(String, Value), CliError> {
    let (key, value) = spec
        .split_once('=')
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| CliError::usage(format!("`{spec}` must look like key=value")))?;
    Ok((key.to_string(), scalar(value)))
}

/// A `key=v1,v2,...` sweep axis.
pub fn parse_axis(spec: &str) -> Result<(String, Vec<Value>), CliError> {
    let (key, values) = spec
        .split_once('=')
        .filter(|(k, v)| !k.is_empty() && !v.is_empty())
        .ok_or_else(|| CliError::usage(format!("`{spec}` must look like key=v1,v2,...")))?;
    Ok((key.to_string(), values.split(',').map(scalar).collect()))
}

fn scalar(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

/// Every combination of the axes, last axis fastest. Point `i` gets seed
/// `base.seed XOR i`.
pub fn expand(base: &ExperimentConfig, axes: &[(String, Vec<Value>)]) -> Vec<ExperimentConfig> {
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    (0..total)
        .map(|i| {
            let mut cfg = base.clone();
            let mut rem = i;
            for (key, values) in axes.iter().rev() {
                cfg.params.insert(key.clone(), values[rem % values.len()].clone());
                rem /= values.len();
            }
            cfg.seed = base.seed ^ i as u64;
            cfg
        })
        .collect()
}

/// Runs all points in parallel; results keep the point order.
pub fn run_points(points: &[ExperimentConfig]) -> Vec<Result<Outcome, CliError>> {
    points.par_iter().map(execute).collect()
}
