//! Miner selection and the parameters shared by `mine` and `bench`.

use std::path::PathBuf;

use armine::bandit::{MctsConfig, PruningPolicy};
use armine::barm::McmcConfig;
use armine::kernels::KernelSpec;
use armine::rlar::TrainConfig;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Apriori,
    Fpgrowth,
    Eclat,
    Gpar,
    Barm,
    BarmMcmc,
    Mab,
    Emab,
    Mcts,
    Rlar,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Apriori => "apriori",
            Algorithm::Fpgrowth => "fpgrowth",
            Algorithm::Eclat => "eclat",
            Algorithm::Gpar => "gpar",
            Algorithm::Barm => "barm",
            Algorithm::BarmMcmc => "barm-mcmc",
            Algorithm::Mab => "mab",
            Algorithm::Emab => "emab",
            Algorithm::Mcts => "mcts",
            Algorithm::Rlar => "rlar",
        }
    }

    /// Reports exact empirical supports.
    pub fn is_frequency_based(self) -> bool {
        !matches!(self, Algorithm::Gpar | Algorithm::Barm | Algorithm::BarmMcmc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub min_support: f64,
    pub min_conf: f64,
    /// Largest itemset considered; defaults to the item count.
    pub m_max: Option<usize>,
    pub seed: u64,
    /// Monte Carlo draws for gpar and barm (defaults 1000 and 10000).
    pub samples: Option<usize>,
    /// Bandit steps for mab/emab, iterations for mcts.
    pub t_max: usize,
    pub episodes: Option<usize>,
    pub kernel: KernelSpec,
    pub fit_iterations: usize,
    pub repair: bool,
    pub priors: Option<PathBuf>,
    pub pruning: Option<PruningPolicy>,
    pub mcmc: McmcConfig,
    pub mcts: MctsConfig,
    pub train: TrainConfig,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            min_support: 0.1,
            min_conf: 0.5,
            m_max: None,
            seed: 0,
            samples: None,
            t_max: 1000,
            episodes: None,
            kernel: KernelSpec::default(),
            fit_iterations: 200,
            repair: false,
            priors: None,
            pruning: None,
            mcmc: McmcConfig::default(),
            mcts: MctsConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

/// Recursively overlays `patch` onto `base`; objects merge, everything else replaces.
pub fn merge_json(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge_json(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

/// Applies a JSON config file on top of values assembled from flags.
pub fn apply_config<T: Serialize + for<'de> Deserialize<'de>>(value: &T, config: Option<&std::path::Path>) -> Result<T, CliError> {
    let Some(path) = config else {
        return Ok(serde_json::from_value(serde_json::to_value(value)?)?);
    };
    let text = std::fs::read_to_string(path)?;
    let patch: Value = serde_json::from_str(&text)?;
    let mut base = serde_json::to_value(value)?;
    merge_json(&mut base, patch);
    serde_json::from_value(base).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}
