use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::config::{Command, CommonFlags};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "pullback", version = crate::report::VERSION, about = "Experiments on truncated pullback measures")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config `{command, params, seed, output, workers, omit_timing}`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed and PULLBACK_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Leave the wall-clock time out of the report.
    #[arg(long, global = true)]
    pub omit_timing: bool,
    /// Sets any parameter, `key=value` with a JSON value (bare strings allowed).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Regularized determinants and Schatten norms.
    Detk(DetkArgs),
    /// Finite-dimensional degree and pullback checks.
    Findim(FindimArgs),
    /// Characteristic functional and Cameron-Martin checks.
    Gaussian(GaussianArgs),
    /// Landau-Ginzburg mass and phase experiment.
    Wzlg(WzlgArgs),
    /// Correlation identity against the Gaussian-moment oracle.
    Fz(FzArgs),
    /// Repeats another subcommand along one parameter axis, as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct DetkArgs {
    /// Rows separated by `;`, entries by `,`.
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub imag: Option<String>,
    #[arg(long)]
    pub laplace_trunc: Option<usize>,
    #[arg(long)]
    pub orders: Option<String>,
    #[arg(long)]
    pub schatten: Option<String>,
}

#[derive(Debug, Args)]
pub struct FindimArgs {
    #[arg(long)]
    pub map: Option<String>,
    /// degree, zero_count, mass or phase.
    #[arg(long)]
    pub mode: Option<String>,
    /// one, bump or disc.
    #[arg(long)]
    pub weight: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub grid_radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GaussianArgs {
    /// characteristic or cameron_martin.
    #[arg(long)]
    pub check: Option<String>,
    #[arg(long = "N")]
    pub trunc: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub fields: Option<usize>,
}

#[derive(Debug, Args)]
pub struct WzlgArgs {
    /// Coefficients `c0,c1,...` of P.
    #[arg(long)]
    pub poly: Option<String>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long = "N")]
    pub trunc: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub starts: Option<usize>,
    /// frechet or literal.
    #[arg(long)]
    pub variant: Option<String>,
    /// eigen or trace_formula.
    #[arg(long)]
    pub route: Option<String>,
    #[arg(long)]
    pub base: Option<f64>,
    #[arg(long)]
    pub max_failure_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FzArgs {
    #[arg(long)]
    pub size: Option<usize>,
    /// gl or sl.
    #[arg(long)]
    pub algebra: Option<String>,
    #[arg(long)]
    pub insertions: Option<String>,
    #[arg(long = "N")]
    pub trunc: Option<usize>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub configs: Option<usize>,
    #[arg(long)]
    pub min_cycle_len: Option<usize>,
    /// dimension or unit.
    #[arg(long)]
    pub loop_weight: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub axis: Option<String>,
    /// Comma-separated axis values.
    #[arg(long)]
    pub values: Option<String>,
}

fn list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::Config(format!("bad entry `{x}` in --{what}"))))
        .collect()
}

fn matrix(raw: &str, what: &str) -> Result<Vec<Vec<f64>>> {
    raw.split(';').map(|row| list(row, what)).collect()
}

struct Overrides(Map<String, Value>);

impl Overrides {
    fn put<T: serde::Serialize>(&mut self, key: &str, v: Option<T>) {
        if let Some(v) = v {
            self.0.insert(key.into(), json!(v));
        }
    }
}

fn set_pair(raw: &str) -> Result<(String, Value)> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{raw}`")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.into()));
    Ok((k.trim().into(), value))
}

impl Sub {
    pub fn command(&self) -> Command {
        match self {
            Sub::Detk(_) => Command::Detk,
            Sub::Findim(_) => Command::Findim,
            Sub::Gaussian(_) => Command::Gaussian,
            Sub::Wzlg(_) => Command::Wzlg,
            Sub::Fz(_) => Command::Fz,
            Sub::Sweep(_) => Command::Sweep,
        }
    }

    /// Parameters set by flags.
    pub fn overrides(&self) -> Result<Map<String, Value>> {
        let mut o = Overrides(Map::new());
        match self {
            Sub::Detk(a) => {
                o.put("matrix", a.matrix.as_deref().map(|m| matrix(m, "matrix")).transpose()?);
                o.put("imag", a.imag.as_deref().map(|m| matrix(m, "imag")).transpose()?);
                o.put("laplace_trunc", a.laplace_trunc);
                o.put("orders", a.orders.as_deref().map(|l| list::<usize>(l, "orders")).transpose()?);
                o.put("schatten", a.schatten.as_deref().map(|l| list::<usize>(l, "schatten")).transpose()?);
            }
            Sub::Findim(a) => {
                o.put("map", a.map.clone());
                o.put("mode", a.mode.clone());
                o.put("weight", a.weight.clone());
                o.put("y", a.y.as_deref().map(|l| list::<f64>(l, "y")).transpose()?);
                o.put("n_samples", a.samples);
                o.put("n_starts", a.starts);
                o.put("grid_points", a.grid_points);
                o.put("grid_radius", a.grid_radius);
            }
            Sub::Gaussian(a) => {
                o.put("check", a.check.clone());
                o.put("trunc", a.trunc);
                o.put("t", a.t);
                o.put("s", a.s);
                o.put("n_samples", a.samples);
                o.put("n_fields", a.fields);
            }
            Sub::Wzlg(a) => {
                o.put("poly", a.poly.as_deref().map(|l| list::<f64>(l, "poly")).transpose()?);
                o.put("s", a.s);
                o.put("t", a.t);
                o.put("trunc", a.trunc);
                o.put("samples", a.samples);
                o.put("starts", a.starts);
                o.put("variant", a.variant.clone());
                o.put("route", a.route.clone());
                o.put("base", a.base);
                o.put("max_failure_rate", a.max_failure_rate);
            }
            Sub::Fz(a) => {
                o.put("size", a.size);
                o.put("algebra", a.algebra.clone());
                o.put("insertions", a.insertions.as_deref().map(|l| list::<usize>(l, "insertions")).transpose()?);
                o.put("trunc", a.trunc);
                o.put("s", a.s);
                o.put("t", a.t);
                o.put("configs", a.configs);
                o.put("min_cycle_len", a.min_cycle_len);
                o.put("loop_weight", a.loop_weight.clone());
                o.put("tolerance", a.tolerance);
            }
            Sub::Sweep(a) => {
                o.put("target", a.target.clone());
                o.put("axis", a.axis.clone());
                o.put("values", a.values.as_deref().map(|l| list::<f64>(l, "values")).transpose()?);
            }
        }
        Ok(o.0)
    }
}

impl Cli {
    pub fn flags(&self) -> CommonFlags {
        CommonFlags {
            config: self.common.config.clone(),
            seed: self.common.seed,
            output: self.common.output.clone(),
            workers: self.common.workers,
            omit_timing: self.common.omit_timing,
        }
    }

    /// `--set` pairs; for `sweep` they address the target's parameters.
    pub fn set_pairs(&self) -> Result<Vec<(String, Value)>> {
        self.common.set.iter().map(|s| set_pair(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_and_matrix_parsing() {
        assert_eq!(list::<f64>("1, 2.5,-3", "x").unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(list::<f64>("", "x").unwrap().is_empty());
        assert!(list::<usize>("1,a", "x").is_err());
        assert_eq!(matrix("1,0;0,1", "m").unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn set_values_are_json_or_strings() {
        assert_eq!(set_pair("n=3").unwrap(), ("n".into(), json!(3)));
        assert_eq!(set_pair("v=[1,2]").unwrap(), ("v".into(), json!([1, 2])));
        assert_eq!(set_pair("map=zsq").unwrap(), ("map".into(), json!("zsq")));
        assert!(set_pair("novalue").is_err());
    }
}
