use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use pullback_core::{mc, McEstimate};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands;
use crate::config::{Command, RunSpec, SeedSource};
use crate::error::Result;
use crate::sweep::{self, SweepParams};

pub const TOOL: &str = "pullback";
/// Crate version with the `git describe` of the build tree.
pub const VERSION: &str = env!("PULLBACK_VERSION");

/// JSON report of a single run; see `schemas/report.schema.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub seed_source: SeedSource,
    /// Parameters after defaults were applied.
    pub params: Value,
    pub estimates: BTreeMap<String, McEstimate>,
    pub results: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Report(Report),
    /// Sweep table.
    Csv(String),
}

impl Artifact {
    pub fn render(&self) -> String {
        match self {
            Artifact::Report(r) => serde_json::to_string_pretty(r).expect("report serializes") + "\n",
            Artifact::Csv(s) => s.clone(),
        }
    }

    pub fn report(&self) -> Option<&Report> {
        match self {
            Artifact::Report(r) => Some(r),
            Artifact::Csv(_) => None,
        }
    }
}

/// Runs `spec` on its worker pool.
pub fn run(spec: &RunSpec) -> Result<Artifact> {
    let start = Instant::now();
    let artifact = mc::with_workers(spec.workers, || -> Result<Artifact> {
        if spec.command == Command::Sweep {
            let p: SweepParams = serde_json::from_value(Value::Object(spec.params.clone()))
                .map_err(|e| crate::CliError::Config(format!("sweep params: {e}")))?;
            return Ok(Artifact::Csv(sweep::run_sweep(&p, spec.seed)?));
        }
        let (params, out) = commands::execute(spec.command, &spec.params, spec.seed)?;
        Ok(Artifact::Report(Report {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: spec.command,
            seed: spec.seed,
            seed_source: spec.seed_source,
            params,
            estimates: out.estimates,
            results: out.results,
            wall_clock_seconds: None,
        }))
    })?;
    Ok(match artifact {
        Artifact::Report(mut r) if !spec.omit_timing => {
            r.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
            Artifact::Report(r)
        }
        other => other,
    })
}

/// Runs `spec` and writes the artifact to its output path or stdout.
pub fn run_and_write(spec: &RunSpec) -> Result<Artifact> {
    let artifact = run(spec)?;
    let text = artifact.render();
    match &spec.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(artifact)
}
