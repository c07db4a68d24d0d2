//! Run settings from an optional JSON file. Command-line flags win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clearpack::{FormulationKind, Rational};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand the file was written for; checked when present.
    pub command: Option<String>,
    pub instance: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub formulation: Option<FormulationKind>,
    pub static_bounds: Option<bool>,
    pub sequence_pair: Option<bool>,
    pub branch_priorities: Option<bool>,
    pub node_limit: Option<usize>,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub warm_start: Option<bool>,
    pub samples: Option<usize>,
    pub epsilon: Option<Rational>,
    pub den: Option<i64>,
    pub seed: Option<u64>,
    pub window_consistent: Option<bool>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, command: &str) -> Result<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(c) = &cfg.command {
            if c != command {
                bail!("config {} is for '{c}', not '{command}'", path.display());
            }
        }
        Ok(cfg)
    }
}

/// Flag, then file, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// A switch that is either given on the command line or set in the file.
pub fn switch(flag: bool, file: Option<bool>) -> bool {
    flag || file.unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 4, "formulation": "ru", "epsilon": "1/2"}"#).unwrap();
        assert_eq!(pick(Some(9), cfg.seed, 0), 9);
        assert_eq!(pick(None, cfg.seed, 0), 4);
        assert_eq!(pick(None, cfg.formulation, FormulationKind::SU), FormulationKind::RU);
        assert_eq!(cfg.epsilon.unwrap(), Rational::new(1, 2));
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 4}"#).is_err());
    }
}
