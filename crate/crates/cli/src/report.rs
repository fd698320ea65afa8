//! Aggregation of experiment records into one CSV table and plot data.

use std::path::Path;

use acnum_core::io::fmt_f64;
use serde_json::Value;

use crate::error::CliError;
use crate::record::ExperimentRecord;

/// Column-aligned view of a homogeneous set of records.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// Reads records from files holding one record or an array of records.
pub fn load_records(paths: &[impl AsRef<Path>]) -> Result<Vec<ExperimentRecord>, CliError> {
    let mut out = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let items = match value {
            Value::Array(items) => items,
            v => vec![v],
        };
        for item in items {
            let r: ExperimentRecord =
                serde_json::from_value(item).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            out.push(r);
        }
    }
    Ok(out)
}

/// One row per record: command, seed, parameters, measurements, pass flag.
/// Every record must have the same command, parameter names and
/// measurement names.
pub fn aggregate(records: &[ExperimentRecord]) -> Result<Table, CliError> {
    let Some(first) = records.first() else {
        return Ok(Table { header: vec!["command".into(), "seed".into(), "passed".into()], rows: Vec::new() });
    };
    let params: Vec<String> = first.config.params.keys().cloned().collect();
    let names: Vec<String> = first.measurements.iter().map(|m| m.name.clone()).collect();
    let mut header = vec!["command".to_string(), "seed".to_string()];
    header.extend(params.iter().cloned());
    header.extend(names.iter().cloned());
    header.push("passed".into());
    let mut rows = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if r.config.command != first.config.command {
            return Err(CliError::usage(format!(
                "schema mismatch: record {i} is {} but record 0 is {}",
                r.config.command.name(),
                first.config.command.name()
            )));
        }
        let rp: Vec<&String> = r.config.params.keys().collect();
        let rn: Vec<&String> = r.measurements.iter().map(|m| &m.name).collect();
        if rp != params.iter().collect::<Vec<_>>() || rn != names.iter().collect::<Vec<_>>() {
            return Err(CliError::usage(format!("schema mismatch: record {i} has different parameters or measurements")));
        }
        let mut row = vec![Value::from(r.config.command.name()), Value::from(r.config.seed)];
        row.extend(params.iter().map(|k| r.config.params[k].clone()));
        row.extend(r.measurements.iter().map(|m| m.value.clone()));
        row.push(Value::Bool(r.passed()));
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => fmt_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn table_csv(table: &Table) -> String {
    let mut out = table.header.join(",");
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.iter().map(cell).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Two whitespace-separated numeric columns `x y`, one line per record.
/// Records where either value is missing are skipped.
pub fn plot_data(table: &Table, x: &str, y: &str) -> Result<String, CliError> {
    let col = |name: &str| {
        table
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::usage(format!("no column `{name}` (have: {})", table.header.join(", "))))
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let mut out = format!("# {x} {y}\n");
    for row in &table.rows {
        let (vx, vy) = (&row[ix], &row[iy]);
        if vx.is_null() || vy.is_null() {
            continue;
        }
        if !vx.is_number() || !vy.is_number() {
            return Err(CliError::usage(format!("columns `{x}` and `{y}` must be numeric")));
        }
        out.push_str(&format!("{} {}\n", cell(vx), cell(vy)));
    }
    Ok(out)
}

/// Parses `x:y`.
pub fn parse_plot_spec(spec: &str) -> Result<(String, String), CliError> {
    match spec.split_once(':') {
        Some((x, y)) if !x.is_empty() && !y.is_empty() => Ok((x.to_string(), y.to_string())),
        _ => Err(CliError::usage(format!("plot spec `{spec}` must look like x:y"))),
    }
}
