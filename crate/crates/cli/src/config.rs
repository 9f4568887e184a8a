//! Optional TOML configuration; command-line flags take precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub ruleset: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub fuzzy_threshold: Option<f64>,
    pub idle_threshold: Option<f64>,
    pub threshold: Option<f64>,
    pub max_depth: Option<usize>,
    pub format: Option<String>,
    pub event: Option<String>,
    #[serde(default)]
    pub colors: BTreeMap<String, String>,
}

impl CliConfig {
    /// Loads `path`; relative paths inside the file are taken relative to it.
    pub fn load(path: &Path) -> Result<CliConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        let mut config: CliConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config `{}`: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.ruleset, &mut config.reference]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}

/// Checks that a fraction lies in `[0, 1]`.
pub fn fraction(name: &str, value: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(CliError::Config(format!(
            "{name} must be between 0 and 1, got {value}"
        )))
    }
}
