//! Experiment configuration, read from a TOML file.
//!
//! ```toml
//! function_ids = [1, 2, 3, 5, 8]
//! dimensions = [2, 5, 30]
//! runs_per_cell = 10
//! budget = 1000
//! strategies = ["constant", "one-fifth", "advisor:surrogate"]
//! mutation_mode = "gaussian-isotropic"
//! instance_seed = 1
//! master_seed = 1
//! output_dir = "results"
//!
//! [advisors.surrogate]
//! provider = "surrogate-one-fifth"
//!
//! [advisors.groq]
//! provider = "http-chat"
//! endpoint_url = "https://api.groq.com/openai/v1"
//! model_name = "llama2-70b-4096"
//! min_request_interval_ms = 500
//! ```
//!
//! Relative paths (`output_dir`, advisor `replay_file`) resolve against
//! the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::adaptation::{StrategySpec, DEFAULT_ADVISOR_PERIOD, DEFAULT_INITIAL_SIGMA};
use crate::advisor::AdvisorConfig;
use crate::error::{Error, Result};
use crate::es::MutationMode;

fn default_dimensions() -> Vec<usize> {
    vec![2, 5, 30]
}

fn default_runs_per_cell() -> usize {
    10
}

fn default_budget() -> usize {
    1000
}

fn default_seed() -> u64 {
    1
}

fn default_initial_sigma() -> f64 {
    DEFAULT_INITIAL_SIGMA
}

fn default_advisor_period() -> usize {
    DEFAULT_ADVISOR_PERIOD
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function_ids: Vec<u32>,
    #[serde(default = "default_dimensions")]
    pub dimensions: Vec<usize>,
    #[serde(default = "default_runs_per_cell")]
    pub runs_per_cell: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Strategy selectors: `constant`, `one-fifth`, or `advisor:<name>`
    /// where `<name>` keys into `[advisors.<name>]`.
    pub strategies: Vec<String>,
    #[serde(default)]
    pub mutation_mode: MutationMode,
    #[serde(default = "default_seed")]
    pub instance_seed: u64,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Starting step size shared by every strategy.
    #[serde(default = "default_initial_sigma")]
    pub initial_sigma: f64,
    /// Generations between advisor queries.
    #[serde(default = "default_advisor_period")]
    pub advisor_period: usize,
    #[serde(default)]
    pub advisors: BTreeMap<String, AdvisorConfig>,
}

impl ExperimentConfig {
    /// Reads and validates a config file, resolving relative paths
    /// against its directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Parses config text, resolving relative paths against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if config.output_dir.is_relative() {
            config.output_dir = base_dir.join(&config.output_dir);
        }
        for advisor in config.advisors.values_mut() {
            if let Some(replay) = &advisor.replay_file {
                if replay.is_relative() {
                    advisor.replay_file = Some(base_dir.join(replay));
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.function_ids.is_empty() {
            return Err(Error::Config("function_ids must not be empty".into()));
        }
        if self.dimensions.is_empty() {
            return Err(Error::Config("dimensions must not be empty".into()));
        }
        if self.runs_per_cell < 1 {
            return Err(Error::Config("runs_per_cell must be at least 1".into()));
        }
        if self.budget < 1 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("at least one strategy is required".into()));
        }
        if self.initial_sigma <= 0.0 || self.initial_sigma.is_nan() {
            return Err(Error::Config("initial_sigma must be positive".into()));
        }
        for name in self.advisors.keys() {
            if name.is_empty()
                || !name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            {
                return Err(Error::Config(format!(
                    "advisor profile name '{name}' must be alphanumeric with '-' or '_'"
                )));
            }
        }
        self.resolve_strategies().map(|_| ())
    }

    /// Expands strategy selector strings into full specs.
    pub fn resolve_strategies(&self) -> Result<Vec<StrategySpec>> {
        self.strategies
            .iter()
            .map(|selector| {
                let spec = match selector.as_str() {
                    "constant" => StrategySpec::Constant {
                        sigma: self.initial_sigma,
                    },
                    "one-fifth" => {
                        StrategySpec::one_fifth().with_initial_sigma(self.initial_sigma)
                    }
                    other => {
                        let profile = other.strip_prefix("advisor:").ok_or_else(|| {
                            Error::Config(format!(
                                "unknown strategy '{other}' (expected 'constant', 'one-fifth', or 'advisor:<name>')"
                            ))
                        })?;
                        let advisor = self.advisors.get(profile).ok_or_else(|| {
                            Error::Config(format!(
                                "strategy 'advisor:{profile}' has no [advisors.{profile}] profile"
                            ))
                        })?;
                        StrategySpec::periodic_advisor(profile, advisor.clone())
                            .with_initial_sigma(self.initial_sigma)
                            .with_period(self.advisor_period)
                    }
                };
                spec.validate()?;
                Ok(spec)
            })
            .collect()
    }

    /// True when any configured strategy talks to a real endpoint.
    pub fn uses_http_chat(&self) -> Result<bool> {
        let specs = self.resolve_strategies()?;
        Ok(specs.iter().any(|s| {
            matches!(
                s,
                StrategySpec::PeriodicAdvisor { advisor, .. }
                    if advisor.provider == crate::advisor::ProviderKind::HttpChat
            )
        }))
    }
}
