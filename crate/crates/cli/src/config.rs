use std::path::Path;

use anyhow::Context;
use lingam::experiment::SweepConfig;
use lingam::{GeneratorConfig, IcaConfig, PruneConfig};
use serde::{Deserialize, Serialize};

/// Settings shared by all subcommands, loaded from TOML and then
/// overridden by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Overrides every section seed when set.
    pub seed: Option<u64>,
    /// Sample count for `generate`.
    pub samples: usize,
    pub model: GeneratorConfig,
    pub ica: IcaConfig,
    pub prune: PruneConfig,
    pub experiment: ExperimentSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            samples: 1000,
            model: GeneratorConfig::default(),
            ica: IcaConfig::default(),
            prune: PruneConfig::default(),
            experiment: ExperimentSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub sparsity_values: Vec<f64>,
    pub trials: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let sweep = SweepConfig::default();
        Self {
            n_values: sweep.n_values,
            m_values: sweep.m_values,
            sparsity_values: sweep.sparsity_values,
            trials: sweep.trials,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Pushes the top-level seed into every section.
    pub fn apply_seed(&mut self) {
        if let Some(seed) = self.seed {
            self.model.seed = seed;
            self.ica.seed = seed;
            self.prune.seed = seed;
        }
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            n_values: self.experiment.n_values.clone(),
            m_values: self.experiment.m_values.clone(),
            sparsity_values: self.experiment.sparsity_values.clone(),
            trials: self.experiment.trials,
            seed: self.seed.unwrap_or(0),
            generator: self.model.clone(),
            ica: self.ica.clone(),
        }
    }
}
