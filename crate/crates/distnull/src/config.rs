//! Defaults file. Every key is optional; command-line flags take precedence.
//!
//! ```toml
//! alpha = 0.05
//! beta = 0.5
//! q_ceiling = 1000.0
//! seed = 0
//! trials = 100000
//! format = "human"
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;
use crate::report::OutputFormat;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub q_ceiling: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub format: Option<OutputFormat>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::File { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }
}

/// Settings after merging flags, the config file and built-in defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub alpha: f64,
    pub beta: f64,
    pub q_ceiling: f64,
    pub seed: u64,
    pub trials: u64,
    pub format: OutputFormat,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            alpha: 0.05,
            beta: 0.5,
            q_ceiling: distnull_core::joint::DEFAULT_Q_CEILING,
            seed: 0,
            trials: crate::mc::DEFAULT_TRIALS,
            format: OutputFormat::Human,
        }
    }
}

impl Settings {
    pub fn from_config(cfg: &ConfigFile) -> Self {
        let d = Settings::default();
        Settings {
            alpha: cfg.alpha.unwrap_or(d.alpha),
            beta: cfg.beta.unwrap_or(d.beta),
            q_ceiling: cfg.q_ceiling.unwrap_or(d.q_ceiling),
            seed: cfg.seed.unwrap_or(d.seed),
            trials: cfg.trials.unwrap_or(d.trials),
            format: cfg.format.unwrap_or(d.format),
        }
    }
}
