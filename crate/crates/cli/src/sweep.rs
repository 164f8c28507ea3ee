use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::commands;
use crate::config::Command;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub target: Command,
    /// Parameter of `target` that takes each value in turn.
    pub axis: String,
    pub values: Vec<f64>,
    /// Fixed parameters of `target`.
    #[serde(default)]
    pub params: Map<String, Value>,
}

fn axis_value(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        Value::from(v as i64)
    } else {
        Value::from(v)
    }
}

/// One CSV row per value: the axis value, then mean (re, im), stderr and
/// sample count of every estimate the target reports.
pub fn run_sweep(p: &SweepParams, seed: u64) -> Result<String> {
    if p.target == Command::Sweep {
        return Err(CliError::Config("a sweep cannot target `sweep`".into()));
    }
    if p.values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    if p.values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Config("sweep values must be finite".into()));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut names: Option<Vec<String>> = None;
    for &v in &p.values {
        let mut params = p.params.clone();
        params.insert(p.axis.clone(), axis_value(v));
        let (_, out) = commands::execute(p.target, &params, seed)?;
        let keys: Vec<String> = out.estimates.keys().cloned().collect();
        match &names {
            None => {
                let mut header = vec![p.axis.clone()];
                for k in &keys {
                    header.extend([format!("{k}_mean_re"), format!("{k}_mean_im"), format!("{k}_stderr"), format!("{k}_n")]);
                }
                writer.write_record(&header).map_err(csv_err)?;
                names = Some(keys);
            }
            Some(n) if *n != keys => {
                return Err(CliError::Config(format!("estimates change along the `{}` axis", p.axis)));
            }
            Some(_) => {}
        }
        let mut row = vec![v.to_string()];
        for e in out.estimates.values() {
            row.extend([e.mean.re.to_string(), e.mean.im.to_string(), e.stderr.to_string(), e.n.to_string()]);
        }
        writer.write_record(&row).map_err(csv_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}
