use super::{beta_posterior, mine_from_estimator, BarmOutput, BetaPrior, JointEstimator, ProductEstimator};
use crate::config::MiningConfig;
use crate::error::{MineError, Result};
use crate::features::FeatureMatrix;
use crate::itemset::Itemset;
use crate::kernels::sampling_factor;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::collections::HashMap;

/// How item probabilities combine into a joint presence probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    /// p(I) = Π p_i.
    Identity,
    /// Latent Gaussians with correlation exp(−‖x_i − x_j‖²/ℓ²), item i present when its
    /// latent value exceeds Φ⁻¹(1 − p_i).
    GaussianCopulaMc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub chain_length: usize,
    pub burn_in: usize,
    pub step_logit: f64,
    pub step_log_length: f64,
    /// Gamma shape for the length-scale prior.
    pub length_shape: f64,
    /// Gamma rate for the length-scale prior.
    pub length_rate: f64,
    pub mode: CorrelationMode,
    /// Latent draws per posterior sample in copula mode.
    pub copula_draws: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chain_length: 20_000,
            burn_in: 5_000,
            step_logit: 0.1,
            step_log_length: 0.1,
            length_shape: 2.0,
            length_rate: 1.0,
            mode: CorrelationMode::Identity,
            copula_draws: 64,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.chain_length {
            return Err(MineError::InvalidConfig(format!(
                "burn-in {} must be shorter than the chain length {}",
                self.burn_in, self.chain_length
            )));
        }
        for (name, v) in [
            ("step_logit", self.step_logit),
            ("step_log_length", self.step_log_length),
            ("length_shape", self.length_shape),
            ("length_rate", self.length_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MineError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mode == CorrelationMode::GaussianCopulaMc && self.copula_draws == 0 {
            return Err(MineError::InvalidConfig("copula_draws must be at least 1".into()));
        }
        Ok(())
    }
}

/// Post-burn-in chain states.
#[derive(Clone, Debug)]
pub struct ChainOutput {
    /// probabilities[k][i] for kept state k.
    pub probabilities: Vec<Vec<f64>>,
    pub length_scales: Vec<f64>,
    pub acceptance_rate: f64,
}

impl ChainOutput {
    pub fn mean_probability(&self, i: usize) -> f64 {
        self.probabilities.iter().map(|p| p[i]).sum::<f64>() / self.probabilities.len() as f64
    }

    /// Every `len / samples`-th state, `samples` in total.
    fn thin(&self, samples: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let kept = self.probabilities.len();
        if samples == 0 || samples > kept {
            return Err(MineError::InvalidConfig(format!(
                "requested {samples} posterior samples from {kept} post-burn-in states"
            )));
        }
        let idx: Vec<usize> = (0..samples).map(|k| k * kept / samples).collect();
        Ok((
            idx.iter().map(|&k| self.probabilities[k].clone()).collect(),
            idx.iter().map(|&k| self.length_scales[k]).collect(),
        ))
    }
}

fn log_sigmoid(u: f64) -> f64 {
    // log(1 / (1 + e^{−u})), computed without overflow
    -((-u).max(0.0) + (-u.abs()).exp().ln_1p())
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// Metropolis-within-Gibbs over (logit p_i, log ℓ).
///
/// Each sweep proposes a Gaussian step for every coordinate in turn. The
/// Bernoulli likelihood depends on ℓ only through the correlation adjustment,
/// which is 1 in the likelihood, so ℓ mixes over its Gamma prior.
pub fn run_chain(counts: &[usize], n: usize, priors: &[BetaPrior], mcmc: &McmcConfig, seed: u64) -> Result<ChainOutput> {
    mcmc.validate()?;
    let m = counts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // log target of u = logit p, Jacobian included: (α+n_i)·log p + (β+N−n_i)·log(1−p)
    let shape: Vec<(f64, f64)> =
        priors.iter().zip(counts).map(|(&(a, b), &c)| (a + c as f64, b + (n - c) as f64)).collect();
    let target_u = |i: usize, u: f64| shape[i].0 * log_sigmoid(u) + shape[i].1 * log_sigmoid(-u);
    let (ga, gb) = (mcmc.length_shape, mcmc.length_rate);
    let target_v = |v: f64| ga * v - gb * v.exp();

    let mut u: Vec<f64> = shape.iter().map(|&(a, b)| (a / b).ln()).collect();
    let mut v = (ga / gb).ln();
    let mut probabilities = Vec::with_capacity(mcmc.chain_length - mcmc.burn_in);
    let mut length_scales = Vec::with_capacity(mcmc.chain_length - mcmc.burn_in);
    let (mut accepted, mut proposed) = (0u64, 0u64);

    for step in 0..mcmc.chain_length {
        let counting = step >= mcmc.burn_in;
        for i in 0..m {
            let z: f64 = rng.sample(StandardNormal);
            let cand = u[i] + mcmc.step_logit * z;
            let log_ratio = target_u(i, cand) - target_u(i, u[i]);
            let ok = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
            if ok {
                u[i] = cand;
            }
            if counting {
                proposed += 1;
                accepted += u64::from(ok);
            }
        }
        let z: f64 = rng.sample(StandardNormal);
        let cand = v + mcmc.step_log_length * z;
        let log_ratio = target_v(cand) - target_v(v);
        let ok = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
        if ok {
            v = cand;
        }
        if counting {
            proposed += 1;
            accepted += u64::from(ok);
            probabilities.push(u.iter().map(|&x| sigmoid(x)).collect());
            length_scales.push(v.exp());
        }
    }
    Ok(ChainOutput { probabilities, length_scales, acceptance_rate: accepted as f64 / proposed.max(1) as f64 })
}

fn copula_correlation(x: &FeatureMatrix, length_scale: f64) -> DMatrix<f64> {
    let m = x.n_items();
    let l2 = length_scale * length_scale;
    DMatrix::from_fn(m, m, |i, j| {
        let d2: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
        (-d2 / l2).exp()
    })
}

fn thresholds(p: &[f64]) -> Vec<f64> {
    let std = Normal::standard();
    p.iter().map(|&pi| std.inverse_cdf(1.0 - pi)).collect()
}

/// Presence masks of `draws` latent vectors: bit i set when z_i exceeds Φ⁻¹(1 − p_i).
fn presence_masks<R: Rng>(p: &[f64], corr: &DMatrix<f64>, draws: usize, rng: &mut R) -> Result<Vec<u64>> {
    let l = sampling_factor(corr)?;
    let tau = thresholds(p);
    let m = p.len();
    let mut eps = DVector::zeros(m);
    let mut z = DVector::zeros(m);
    let mut out = Vec::with_capacity(draws);
    for _ in 0..draws {
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        l.mul_to(&eps, &mut z);
        let mut mask = 0u64;
        for i in 0..m {
            if z[i] > tau[i] {
                mask |= 1 << i;
            }
        }
        out.push(mask);
    }
    Ok(out)
}

/// Monte Carlo joint presence probability of all items under the copula with marginals `p`.
pub fn copula_joint_probability<R: Rng>(p: &[f64], corr: &DMatrix<f64>, draws: usize, rng: &mut R) -> Result<f64> {
    if p.len() > 64 {
        return Err(MineError::TooLarge { what: "copula item count", limit: 64, got: p.len() });
    }
    let full = if p.len() == 64 { u64::MAX } else { (1u64 << p.len()) - 1 };
    let masks = presence_masks(p, corr, draws, rng)?;
    Ok(masks.iter().filter(|&&w| w & full == full).count() as f64 / draws as f64)
}

/// Fraction of all stored latent draws whose presence mask covers the itemset.
struct CopulaEstimator {
    masks: Vec<u64>,
    cache: HashMap<u64, f64>,
}

impl JointEstimator for CopulaEstimator {
    fn joint(&mut self, itemset: &Itemset) -> f64 {
        let key = itemset.mask().expect("copula path requires M <= 64");
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let v = self.masks.iter().filter(|&&w| w & key == key).count() as f64 / self.masks.len() as f64;
        self.cache.insert(key, v);
        v
    }
}

/// Runs the chain, thins it to `samples` states and mines from the resulting joint estimates.
pub fn mine_barm_mcmc(
    data: &crate::transactions::TransactionMatrix,
    x: Option<&FeatureMatrix>,
    priors: &[BetaPrior],
    mcmc: &McmcConfig,
    cfg: &MiningConfig,
    samples: usize,
) -> Result<BarmOutput> {
    cfg.validate(data.n_items())?;
    mcmc.validate()?;
    let m = data.n_items();
    if mcmc.mode == CorrelationMode::GaussianCopulaMc {
        let x = x.ok_or_else(|| MineError::InvalidConfig("copula mode needs item features".into()))?;
        if x.n_items() != m {
            return Err(MineError::InvalidData(format!("{} feature rows for {m} items", x.n_items())));
        }
        if m > 64 {
            return Err(MineError::TooLarge { what: "item count for copula mode", limit: 64, got: m });
        }
    }
    let belief = beta_posterior(priors, data)?;
    let chain = run_chain(&belief.counts, belief.n, priors, mcmc, cfg.seed)?;
    let mut warnings = Vec::new();
    if !(0.05..=0.95).contains(&chain.acceptance_rate) {
        warnings.push(format!(
            "acceptance rate {:.3} outside [0.05, 0.95]; consider changing the proposal step",
            chain.acceptance_rate
        ));
    }
    let (probs, scales) = chain.thin(samples)?;
    let (output, empirical_support) = match mcmc.mode {
        CorrelationMode::Identity => mine_from_estimator(&mut ProductEstimator::new(probs), data, cfg)?,
        CorrelationMode::GaussianCopulaMc => {
            let x = x.expect("checked above");
            let mut masks = Vec::with_capacity(samples * mcmc.copula_draws);
            for (s, (p, ell)) in probs.iter().zip(&scales).enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (s as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                masks.extend(presence_masks(p, &copula_correlation(x, *ell), mcmc.copula_draws, &mut rng)?);
            }
            mine_from_estimator(&mut CopulaEstimator { masks, cache: HashMap::new() }, data, cfg)?
        }
    };
    Ok(BarmOutput { output, empirical_support, warnings, acceptance_rate: Some(chain.acceptance_rate) })
}
