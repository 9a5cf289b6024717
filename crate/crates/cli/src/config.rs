use std::fs;
use std::path::Path;

use clap::Args;
use dalex::evolve::{EvolutionConfig, FidelityMode, ProblemConfig};
use dalex::SelectorConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Contents of a `--config` TOML file. Every section is optional.
///
/// ```toml
/// seed = 7
/// runs = 10
///
/// [selector]
/// method = "dalex"
/// pressure = 200.0
///
/// [problem]
/// kind = "discrete_vector"
///
/// [run]
/// pop_size = 200
/// generations = 100
///
/// [fidelity]
/// enabled = true
/// samples = 2000
/// mode = "auto"
/// ```
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub selector: SelectorConfig,
    pub problem: ProblemConfig,
    pub run: EvolutionConfig,
    pub fidelity: FidelitySection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FidelitySection {
    pub enabled: bool,
    /// Samples per generation for empirical distributions.
    pub samples: usize,
    pub mode: FidelityMode,
}

impl Default for FidelitySection {
    fn default() -> Self {
        FidelitySection {
            enabled: false,
            samples: 10_000,
            mode: FidelityMode::Auto,
        }
    }
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
        toml::from_str(&text).map_err(|source| CliError::ConfigFile {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Selector flags; each one given overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct SelectorArgs {
    /// Selection method (dalex, lexicase, epsilon_lexicase, batch_lexicase).
    #[arg(long)]
    pub method: Option<String>,
    /// Particularity pressure: standard deviation of importance scores.
    #[arg(long)]
    pub pressure: Option<f64>,
    /// Importance-score distribution (normal, uniform, shuffled_range).
    #[arg(long)]
    pub distribution: Option<String>,
    /// Standardize errors per case before weighting.
    #[arg(long)]
    pub relaxed: bool,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// `mad` or a non-negative number.
    #[arg(long)]
    pub batch_threshold: Option<String>,
    /// Spread selection events across threads.
    #[arg(long)]
    pub parallel: bool,
}

impl SelectorArgs {
    pub fn apply(&self, cfg: &mut SelectorConfig) -> CliResult<()> {
        if let Some(m) = &self.method {
            cfg.method = m.clone();
        }
        if let Some(p) = self.pressure {
            cfg.pressure = p;
        }
        if let Some(d) = &self.distribution {
            cfg.distribution = d.clone();
        }
        if self.relaxed {
            cfg.relaxed = true;
        }
        if let Some(b) = self.batch_size {
            cfg.batch_size = b;
        }
        match self.batch_threshold.as_deref() {
            None => {}
            Some("mad") => cfg.batch_threshold_mode = "mad".into(),
            Some(v) => {
                cfg.batch_threshold_mode = "absolute".into();
                cfg.batch_threshold_value = v
                    .parse()
                    .map_err(|_| CliError::config("batch_threshold", format!("expected `mad` or a number, got `{v}`")))?;
            }
        }
        if self.parallel {
            cfg.parallel = true;
        }
        Ok(())
    }
}
