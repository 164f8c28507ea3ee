use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

/// Environment variable consulted for the seed when neither a flag nor the
/// config file sets one.
pub const SEED_ENV: &str = "PULLBACK_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Detk,
    Findim,
    Gaussian,
    Wzlg,
    Fz,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Detk => "detk",
            Command::Findim => "findim",
            Command::Gaussian => "gaussian",
            Command::Wzlg => "wzlg",
            Command::Fz => "fz",
            Command::Sweep => "sweep",
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    /// Worker threads; 0 or absent uses all cores.
    pub workers: Option<usize>,
    #[serde(default)]
    pub omit_timing: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    Flag,
    Config,
    Env,
    Default,
}

/// Flag > config > environment > 0.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>, env: Option<&str>) -> Result<(u64, SeedSource)> {
    if let Some(s) = flag {
        return Ok((s, SeedSource::Flag));
    }
    if let Some(s) = config {
        return Ok((s, SeedSource::Config));
    }
    if let Some(raw) = env {
        let s = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}=`{raw}` is not an unsigned integer")))?;
        return Ok((s, SeedSource::Env));
    }
    Ok((0, SeedSource::Default))
}

/// A fully resolved run: what to do, with which parameters and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub params: Map<String, Value>,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub output: Option<PathBuf>,
    pub workers: usize,
    pub omit_timing: bool,
}

/// Flag values that sit beside the subcommand parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommonFlags {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub omit_timing: bool,
}

/// Merges the config file (if any) with flag overrides.
pub fn resolve(
    command: Command,
    flags: &CommonFlags,
    overrides: Map<String, Value>,
    env_seed: Option<&str>,
) -> Result<RunSpec> {
    let config = flags.config.as_deref().map(ExperimentConfig::load).transpose()?;
    if let Some(c) = &config {
        if c.command != command {
            return Err(CliError::Config(format!(
                "config is for `{}` but `{}` was requested",
                c.command.name(),
                command.name()
            )));
        }
    }
    let mut params = config.as_ref().map(|c| c.params.clone()).unwrap_or_default();
    params.extend(overrides);
    let (seed, seed_source) = resolve_seed(flags.seed, config.as_ref().and_then(|c| c.seed), env_seed)?;
    Ok(RunSpec {
        command,
        params,
        seed,
        seed_source,
        output: flags.output.clone().or_else(|| config.as_ref().and_then(|c| c.output.clone())),
        workers: flags.workers.or_else(|| config.as_ref().and_then(|c| c.workers)).unwrap_or(0),
        omit_timing: flags.omit_timing || config.as_ref().is_some_and(|c| c.omit_timing),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some(2), Some("3")).unwrap(), (1, SeedSource::Flag));
        assert_eq!(resolve_seed(None, Some(2), Some("3")).unwrap(), (2, SeedSource::Config));
        assert_eq!(resolve_seed(None, None, Some(" 3 ")).unwrap(), (3, SeedSource::Env));
        assert_eq!(resolve_seed(None, None, None).unwrap(), (0, SeedSource::Default));
        assert!(resolve_seed(None, None, Some("x")).is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let ok: std::result::Result<ExperimentConfig, _> =
            serde_json::from_str(r#"{"command": "detk", "params": {"orders": [2]}, "seed": 4}"#);
        assert!(ok.is_ok());
        let bad: std::result::Result<ExperimentConfig, _> = serde_json::from_str(r#"{"command": "detk", "sed": 4}"#);
        assert!(bad.is_err());
        let bad: std::result::Result<ExperimentConfig, _> = serde_json::from_str(r#"{"command": "fourier"}"#);
        assert!(bad.is_err());
    }
}
