//! Dispatches one miner run.

use std::fs::File;
use std::io::BufReader;

use armine::bandit::{mine_emab, mine_mab, mine_mcts, MabConfig};
use armine::barm::{mine_barm_free, mine_barm_mcmc, read_priors_csv, uniform_priors};
use armine::classic::{mine_apriori, mine_eclat, mine_fpgrowth};
use armine::gpar::{mine_gpar, GparOptions};
use armine::rlar::{mine_rlar, Mlp};
use armine::{FeatureMatrix, MineError, MiningConfig, MiningOutput, TransactionMatrix};

use crate::settings::{Algorithm, Params};
use crate::CliError;

/// Side outputs some miners produce besides rules and itemsets.
#[derive(Debug, Default)]
pub struct Extras {
    pub visit_log: Option<Vec<(armine::Itemset, usize)>>,
    pub reward_trace: Option<Vec<f64>>,
    pub network: Option<Mlp>,
    pub warnings: Vec<String>,
}

pub struct Run {
    pub output: MiningOutput,
    pub extras: Extras,
}

pub fn mining_config(params: &Params, min_support: f64, m: usize) -> MiningConfig {
    MiningConfig::new(min_support, params.min_conf, params.m_max.unwrap_or(m)).with_seed(params.seed)
}

pub fn run_algorithm(
    algo: Algorithm,
    data: &TransactionMatrix,
    features: Option<&FeatureMatrix>,
    params: &Params,
    min_support: f64,
) -> Result<Run, CliError> {
    let cfg = mining_config(params, min_support, data.n_items());
    let mut extras = Extras::default();
    let priors = || -> Result<_, CliError> {
        match &params.priors {
            Some(p) => Ok(read_priors_csv(BufReader::new(File::open(p)?), data.labels())?),
            None => Ok(uniform_priors(data.n_items())),
        }
    };
    let output = match algo {
        Algorithm::Apriori => mine_apriori(data, &cfg)?,
        Algorithm::Fpgrowth => mine_fpgrowth(data, &cfg)?,
        Algorithm::Eclat => mine_eclat(data, &cfg)?,
        Algorithm::Gpar => {
            let x = features.ok_or_else(|| MineError::InvalidConfig("features required for gpar".into()))?;
            let opts = GparOptions { samples: params.samples.unwrap_or(1000), fit_iterations: params.fit_iterations, repair: params.repair };
            mine_gpar(x, data, &params.kernel, &cfg, &opts)?.1
        }
        Algorithm::Barm => {
            let out = mine_barm_free(data, &priors()?, &cfg, params.samples.unwrap_or(10_000))?;
            extras.warnings = out.warnings;
            out.output
        }
        Algorithm::BarmMcmc => {
            let out = mine_barm_mcmc(data, features, &priors()?, &params.mcmc, &cfg, params.samples.unwrap_or(10_000))?;
            extras.warnings = out.warnings;
            out.output
        }
        Algorithm::Mab | Algorithm::Emab => {
            let mab = MabConfig { pruning: params.pruning.clone(), ..MabConfig::new(params.t_max, cfg.max_itemset_size) };
            let out = if algo == Algorithm::Mab { mine_mab(data, &cfg, &mab)? } else { mine_emab(data, &cfg, &mab)? };
            extras.visit_log = Some(out.visit_log);
            out.output
        }
        Algorithm::Mcts => {
            let mcts = armine::bandit::MctsConfig { iterations: params.t_max, m_max: cfg.max_itemset_size, ..params.mcts.clone() };
            mine_mcts(data, &cfg, &mcts)?.output
        }
        Algorithm::Rlar => {
            let mut train = params.train.clone();
            if let Some(e) = params.episodes {
                train.episodes = e;
            }
            let out = mine_rlar(data, &cfg, &train)?;
            extras.reward_trace = Some(out.training.reward_trace);
            extras.network = Some(out.training.network);
            out.output
        }
    };
    Ok(Run { output, extras })
}
