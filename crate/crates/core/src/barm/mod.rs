//! Bayesian association rules with Beta–Bernoulli item beliefs.
//!
//! The conjugate path samples item probabilities from their Beta posteriors;
//! the MCMC path runs Metropolis–Hastings over logit probabilities and a
//! kernel length-scale, optionally coupling items through a Gaussian copula.

mod mcmc;

pub use mcmc::{copula_joint_probability, mine_barm_mcmc, run_chain, ChainOutput, CorrelationMode, McmcConfig};

use crate::config::MiningConfig;
use crate::error::{MineError, Result};
use crate::itemset::{enumerate_itemsets, split_rule, Itemset};
use crate::metrics::meets;
use crate::rule::{normalize_rules, FrequentItemsetTable, MiningOutput, Rule};
use crate::transactions::TransactionMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::io::Read;

/// Beta prior parameters (α, β) for one item.
pub type BetaPrior = (f64, f64);

/// Per-item priors and conjugate posteriors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaBelief {
    pub prior: Vec<BetaPrior>,
    pub posterior: Vec<BetaPrior>,
    pub counts: Vec<usize>,
    pub n: usize,
}

impl BetaBelief {
    /// Conjugate update from presence counts out of `n` transactions.
    pub fn from_counts(prior: &[BetaPrior], counts: &[usize], n: usize) -> Result<Self> {
        if prior.len() != counts.len() {
            return Err(MineError::InvalidConfig(format!("{} priors for {} items", prior.len(), counts.len())));
        }
        for (i, &(a, b)) in prior.iter().enumerate() {
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err(MineError::InvalidConfig(format!("prior for item {i} must be positive, got ({a}, {b})")));
            }
            if counts[i] > n {
                return Err(MineError::InvalidData(format!("count {} for item {i} exceeds N = {n}", counts[i])));
            }
        }
        let posterior = prior
            .iter()
            .zip(counts)
            .map(|(&(a, b), &c)| (a + c as f64, b + (n - c) as f64))
            .collect();
        Ok(BetaBelief { prior: prior.to_vec(), posterior, counts: counts.to_vec(), n })
    }

    pub fn posterior_mean(&self, i: usize) -> f64 {
        let (a, b) = self.posterior[i];
        a / (a + b)
    }

    pub fn n_items(&self) -> usize {
        self.prior.len()
    }
}

/// Beta(1, 1) for each of `m` items.
pub fn uniform_priors(m: usize) -> Vec<BetaPrior> {
    vec![(1.0, 1.0); m]
}

/// Conjugate Beta posterior for every item.
pub fn beta_posterior(priors: &[BetaPrior], data: &TransactionMatrix) -> Result<BetaBelief> {
    BetaBelief::from_counts(priors, &data.item_counts(), data.n_transactions())
}

/// Reads `item,alpha,beta` rows, where `item` is a label or index; unlisted items get Beta(1, 1).
pub fn read_priors_csv<R: Read>(reader: R, labels: &[String]) -> Result<Vec<BetaPrior>> {
    let mut out = uniform_priors(labels.len());
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |column: &str, message: String| MineError::Parse { row: r + 1, column: column.into(), message };
        let key = rec.get(0).ok_or_else(|| bad("item", "missing".into()))?;
        let idx = labels
            .iter()
            .position(|l| l == key)
            .or_else(|| key.parse::<usize>().ok().filter(|&i| i < labels.len()))
            .ok_or_else(|| bad("item", format!("unknown item {key:?}")))?;
        let num = |k: usize, name: &str| -> Result<f64> {
            let cell = rec.get(k).ok_or_else(|| bad(name, "missing".into()))?;
            cell.parse().map_err(|_| bad(name, format!("not a number: {cell:?}")))
        };
        out[idx] = (num(1, "alpha")?, num(2, "beta")?);
    }
    Ok(out)
}

/// Mining result with both model-based and empirical supports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarmOutput {
    pub output: MiningOutput,
    /// Empirical frequency of each reported itemset.
    pub empirical_support: BTreeMap<Itemset, f64>,
    pub warnings: Vec<String>,
    /// Post-burn-in acceptance rate (MCMC path only).
    pub acceptance_rate: Option<f64>,
}

/// Estimates p(I) from a fixed set of posterior samples, memoized by itemset.
pub(crate) trait JointEstimator {
    fn joint(&mut self, itemset: &Itemset) -> f64;
}

/// Mean over samples of Π_{i∈I} p_i.
pub(crate) struct ProductEstimator {
    /// samples[s][i]
    samples: Vec<Vec<f64>>,
    cache: HashMap<Itemset, f64>,
}

impl ProductEstimator {
    pub(crate) fn new(samples: Vec<Vec<f64>>) -> Self {
        ProductEstimator { samples, cache: HashMap::new() }
    }
}

impl JointEstimator for ProductEstimator {
    fn joint(&mut self, itemset: &Itemset) -> f64 {
        if let Some(&v) = self.cache.get(itemset) {
            return v;
        }
        // ascending item order per sample and a fixed summation order make the
        // estimate exactly non-increasing under set inclusion
        let mut sum = 0.0;
        for p in &self.samples {
            let mut prod = 1.0;
            for &i in itemset.items() {
                prod *= p[i];
            }
            sum += prod;
        }
        let v = sum / self.samples.len() as f64;
        self.cache.insert(itemset.clone(), v);
        v
    }
}

pub(crate) fn mine_from_estimator<E: JointEstimator>(
    est: &mut E,
    data: &TransactionMatrix,
    cfg: &MiningConfig,
) -> Result<(MiningOutput, BTreeMap<Itemset, f64>)> {
    let m = data.n_items();
    let n = data.n_transactions() as f64;
    let mut itemsets = FrequentItemsetTable::new();
    let mut empirical = BTreeMap::new();
    let mut rules = Vec::new();
    for s in enumerate_itemsets(m, 2, cfg.max_itemset_size)? {
        let p = est.joint(&s);
        if p <= cfg.min_support {
            continue;
        }
        itemsets.insert(s.clone(), p);
        empirical.insert(s.clone(), data.count_unchecked(&s) as f64 / n);
        for (a, b) in split_rule(&s)? {
            let pa = est.joint(&a);
            if pa <= 0.0 {
                continue;
            }
            let conf = p / pa;
            if meets(conf, cfg.min_confidence) {
                let pb = est.joint(&b);
                rules.push(Rule { antecedent: a, consequent: b, support: p, confidence: conf, lift: p / (pa * pb) });
            }
        }
    }
    Ok((MiningOutput { itemsets, rules: normalize_rules(rules) }, empirical))
}

/// `samples` joint draws from the independent Beta posteriors; `out[s][i]` is item i in draw s.
pub fn draw_posterior(belief: &BetaBelief, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<Beta<f64>> = belief
        .posterior
        .iter()
        .map(|&(a, b)| Beta::new(a, b).map_err(|e| MineError::Numerical(format!("beta({a}, {b}): {e}"))))
        .collect::<Result<_>>()?;
    Ok((0..samples).map(|_| dists.iter().map(|d| d.sample(&mut rng)).collect()).collect())
}

/// Sample mean of Π_{i∈I} p_i over the given draws.
pub fn joint_from_samples(samples: &[Vec<f64>], itemset: &Itemset) -> f64 {
    ProductEstimator::new(samples.to_vec()).joint(itemset)
}

/// Draws `samples` joint posterior samples (items independent), then mines
/// itemsets with p(I) > min_support and rules with p(I)/p(A) ≥ min_confidence.
pub fn mine_barm_free(
    data: &TransactionMatrix,
    priors: &[BetaPrior],
    cfg: &MiningConfig,
    samples: usize,
) -> Result<BarmOutput> {
    cfg.validate(data.n_items())?;
    if samples == 0 {
        return Err(MineError::InvalidConfig("sample count must be at least 1".into()));
    }
    let belief = beta_posterior(priors, data)?;
    let draws = draw_posterior(&belief, samples, cfg.seed)?;
    let mut est = ProductEstimator::new(draws);
    let (output, empirical_support) = mine_from_estimator(&mut est, data, cfg)?;
    Ok(BarmOutput { output, empirical_support, warnings: Vec::new(), acceptance_rate: None })
}
