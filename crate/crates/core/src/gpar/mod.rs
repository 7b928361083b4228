//! Gaussian-process association rules.
//!
//! Each item gets a latent Gaussian value whose covariance comes from a kernel
//! over item features; an itemset co-occurs when all its latent values are
//! positive. Hyper-parameters are fitted by treating each 0/1 transaction
//! vector as a draw from N(0, K + σ_n² I).

mod simplex;

pub use simplex::maximize;

use crate::config::MiningConfig;
use crate::error::{MineError, Result};
use crate::features::FeatureMatrix;
use crate::itemset::{enumerate_itemsets, split_rule, Itemset};
use crate::kernels::{
    build_covariance, kernel_eval, orthant_prob_analytic, orthant_prob_mc, psd_check, psd_repair, sampling_factor,
    CovarianceMatrix, KernelKind, KernelSpec,
};
use crate::rule::{normalize_rules, FrequentItemsetTable, MiningOutput, Rule};
use crate::seeding::{itemset_seed, nested_seed};
use crate::transactions::TransactionMatrix;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest item count accepted by the miner.
pub const MAX_ITEMS: usize = 20;

const PSD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GparOptions {
    /// Monte Carlo draws per co-occurrence estimate.
    pub samples: usize,
    /// Simplex iteration budget for hyper-parameter search; 0 keeps the seed values.
    pub fit_iterations: usize,
    /// Allow eigenvalue clipping for kernels whose Gram is not PSD.
    pub repair: bool,
}

impl Default for GparOptions {
    fn default() -> Self {
        GparOptions { samples: 1000, fit_iterations: 200, repair: false }
    }
}

/// A fitted latent Gaussian model over the items.
#[derive(Clone, Debug)]
pub struct GpModel {
    pub spec: KernelSpec,
    pub features: FeatureMatrix,
    /// K + σ_n² I, after repair when applicable.
    pub covariance: CovarianceMatrix,
    /// Lower factor with factor·factorᵀ = covariance.
    pub factor: DMatrix<f64>,
    /// Training objective at `spec`.
    pub log_likelihood: f64,
    pub repair: bool,
}

impl GpModel {
    /// Wraps a fixed covariance; used for testing and for externally built models.
    pub fn from_covariance(covariance: DMatrix<f64>, features: FeatureMatrix) -> Result<Self> {
        if covariance.nrows() != features.n_items() {
            return Err(MineError::InvalidData("covariance and features disagree on M".into()));
        }
        let cov = CovarianceMatrix::from_matrix(covariance);
        let report = psd_check(&cov, PSD_TOL)?;
        if !report.is_psd {
            return Err(MineError::NotPsd { min_eigenvalue: report.min_eigenvalue });
        }
        let factor = sampling_factor(&cov.matrix)?;
        Ok(GpModel {
            spec: KernelSpec::default(),
            features,
            covariance: cov,
            factor,
            log_likelihood: f64::NAN,
            repair: false,
        })
    }

    pub fn n_items(&self) -> usize {
        self.covariance.dim()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Analytic,
    MonteCarlo,
}

/// Co-occurrence probability of an itemset under the latent model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthantEstimate {
    pub itemset: Itemset,
    pub probability: f64,
    pub samples: usize,
    /// Binomial standard error; zero for closed-form values.
    pub std_error: f64,
    pub method: EstimateMethod,
}

/// Maps a spec to the unconstrained log-space vector searched by the optimizer.
fn to_params(spec: &KernelSpec) -> Vec<f64> {
    let noise = if spec.noise > 0.0 { spec.noise } else { 1e-2 };
    let mut p = match spec.kind {
        KernelKind::Rbf | KernelKind::AbsoluteRbf => vec![spec.magnitude.ln(), spec.length_scale.ln()],
        KernelKind::ShiftedRbf => {
            vec![spec.magnitude.ln(), spec.length_scale.ln(), spec.shift.max(1e-1).ln()]
        }
        KernelKind::Eimq => vec![spec.magnitude.ln(), spec.c.ln(), spec.beta.ln()],
        KernelKind::ArcsinNn => vec![spec.magnitude.ln(), 0.0],
        KernelKind::Ntk3 => vec![spec.width.ln()],
    };
    p.push(noise.ln());
    p
}

fn from_params(seed: &KernelSpec, p: &[f64]) -> KernelSpec {
    let mut s = seed.clone();
    let e = |v: f64| v.clamp(-30.0, 30.0).exp();
    match s.kind {
        KernelKind::Rbf | KernelKind::AbsoluteRbf => {
            s.magnitude = e(p[0]);
            s.length_scale = e(p[1]);
        }
        KernelKind::ShiftedRbf => {
            s.magnitude = e(p[0]);
            s.length_scale = e(p[1]);
            s.shift = e(p[2]);
        }
        KernelKind::Eimq => {
            s.magnitude = e(p[0]);
            s.c = e(p[1]);
            s.beta = e(p[2]);
        }
        KernelKind::ArcsinNn => {
            s.magnitude = e(p[0]);
            s.weight_prior = seed.weight_prior.iter().map(|w| w * e(p[1])).collect();
        }
        KernelKind::Ntk3 => s.width = e(p[0]),
    }
    s.noise = e(*p.last().expect("noise parameter"));
    s
}

/// Kernel Gram without noise, repaired when the kind requires it or repair is enabled.
fn latent_gram(spec: &KernelSpec, x: &FeatureMatrix, repair: bool) -> Result<(CovarianceMatrix, bool)> {
    let k = build_covariance(spec, x, false)?;
    if spec.kind == KernelKind::ShiftedRbf {
        return Ok((psd_repair(&k)?, true));
    }
    let report = psd_check(&k, PSD_TOL)?;
    if report.is_psd {
        Ok((k, false))
    } else if repair {
        Ok((psd_repair(&k)?, true))
    } else {
        Err(MineError::NotPsd { min_eigenvalue: report.min_eigenvalue })
    }
}

fn with_noise(k: &CovarianceMatrix, noise: f64) -> CovarianceMatrix {
    let mut out = k.clone();
    for i in 0..out.dim() {
        out.matrix[(i, i)] += noise;
    }
    out
}

/// Sufficient statistics of the transactions: Σ_j t_j t_jᵀ.
fn scatter(data: &TransactionMatrix) -> DMatrix<f64> {
    let m = data.n_items();
    let mut s = DMatrix::zeros(m, m);
    for r in 0..data.n_transactions() {
        let present: Vec<usize> = (0..m).filter(|&j| data.get(r, j)).collect();
        for &a in &present {
            for &b in &present {
                s[(a, b)] += 1.0;
            }
        }
    }
    s
}

/// Σ_j log N(t_j | 0, K_t) given the scatter matrix; `None` when K_t is not positive definite.
fn gaussian_log_density(kt: &DMatrix<f64>, scatter: &DMatrix<f64>, n: usize) -> Option<f64> {
    let m = kt.nrows() as f64;
    let ch = kt.clone().cholesky()?;
    let log_det = 2.0 * ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let quad = ch.solve(scatter).trace();
    let v = -0.5 * quad - 0.5 * n as f64 * log_det - 0.5 * n as f64 * m * (2.0 * PI).ln();
    v.is_finite().then_some(v)
}

/// Training objective for explicit hyper-parameters; `None` when the candidate is infeasible.
pub fn log_likelihood(spec: &KernelSpec, x: &FeatureMatrix, data: &TransactionMatrix, repair: bool) -> Option<f64> {
    let (k, _) = latent_gram(spec, x, repair).ok()?;
    gaussian_log_density(&with_noise(&k, spec.noise).matrix, &scatter(data), data.n_transactions())
}

fn check_shapes(x: &FeatureMatrix, data: &TransactionMatrix) -> Result<()> {
    if x.n_items() != data.n_items() {
        return Err(MineError::InvalidData(format!(
            "{} feature rows for {} items",
            x.n_items(),
            data.n_items()
        )));
    }
    Ok(())
}

/// Fits kernel hyper-parameters by maximizing the summed Gaussian log-density
/// of the transaction vectors, starting from `seed_spec`.
pub fn fit_gp(x: &FeatureMatrix, data: &TransactionMatrix, seed_spec: &KernelSpec, opts: &GparOptions) -> Result<GpModel> {
    check_shapes(x, data)?;
    seed_spec.validate()?;
    // refuse invalid kernels up front rather than silently rejecting every candidate
    latent_gram(seed_spec, x, opts.repair)?;
    let s = scatter(data);
    let n = data.n_transactions();
    let objective = |p: &[f64]| -> f64 {
        let spec = from_params(seed_spec, p);
        match latent_gram(&spec, x, opts.repair) {
            Ok((k, _)) => gaussian_log_density(&with_noise(&k, spec.noise).matrix, &s, n).unwrap_or(f64::NEG_INFINITY),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let start = to_params(seed_spec);
    let (best, value) = if opts.fit_iterations == 0 {
        let v = objective(&start);
        (start, v)
    } else {
        let (p1, _) = maximize(objective, &start, 1.0, opts.fit_iterations);
        // one restart from the incumbent guards against a collapsed simplex
        maximize(objective, &p1, 0.5, opts.fit_iterations)
    };
    if !value.is_finite() {
        return Err(MineError::Numerical("no feasible hyper-parameters found during fitting".into()));
    }
    let spec = if opts.fit_iterations == 0 { seed_spec.clone() } else { from_params(seed_spec, &best) };
    build_model(spec, x.clone(), opts.repair, value)
}

fn build_model(spec: KernelSpec, features: FeatureMatrix, repair: bool, log_likelihood: f64) -> Result<GpModel> {
    let (k, _) = latent_gram(&spec, &features, repair)?;
    let kt = with_noise(&k, spec.noise);
    let factor = sampling_factor(&kt.matrix)?;
    Ok(GpModel { spec, features, covariance: kt, factor, log_likelihood, repair })
}

/// p(all latent values of `itemset` > 0); closed form for one or two items, Monte Carlo otherwise.
pub fn estimate_cooccurrence(model: &GpModel, itemset: &Itemset, samples: usize, seed: u64) -> Result<OrthantEstimate> {
    estimate_with_seed(model, itemset, samples, itemset_seed(seed, itemset))
}

fn estimate_with_seed(model: &GpModel, itemset: &Itemset, samples: usize, rng_seed: u64) -> Result<OrthantEstimate> {
    if samples == 0 {
        return Err(MineError::InvalidConfig("sample count must be at least 1".into()));
    }
    if itemset.is_empty() {
        return Err(MineError::InvalidItemset("co-occurrence of the empty itemset".into()));
    }
    itemset.validate(model.n_items())?;
    let sub = model.covariance.submatrix(itemset.items());
    if itemset.len() <= 2 {
        let p = orthant_prob_analytic(&sub)?;
        return Ok(OrthantEstimate {
            itemset: itemset.clone(),
            probability: p,
            samples,
            std_error: 0.0,
            method: EstimateMethod::Analytic,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (p, se) = orthant_prob_mc(&sub, samples, &mut rng)?;
    Ok(OrthantEstimate { itemset: itemset.clone(), probability: p, samples, std_error: se, method: EstimateMethod::MonteCarlo })
}

/// Enumerates itemsets of size 2..=max, keeps those with p(I) > min_support and
/// emits each split with p(I)/p(A) > min_confidence. p(A) and p(B) are fresh
/// estimates, so confidence can exceed 1.
pub fn mine_with_model(model: &GpModel, cfg: &MiningConfig, samples: usize) -> Result<MiningOutput> {
    let m = model.n_items();
    cfg.validate(m)?;
    if m > MAX_ITEMS {
        return Err(MineError::TooLarge { what: "item count for GPAR", limit: MAX_ITEMS, got: m });
    }
    let mut itemsets = FrequentItemsetTable::new();
    let mut rules = Vec::new();
    for s in enumerate_itemsets(m, 2, cfg.max_itemset_size)? {
        let p = estimate_cooccurrence(model, &s, samples, cfg.seed)?.probability;
        if p <= cfg.min_support {
            continue;
        }
        itemsets.insert(s.clone(), p);
        for (a, b) in split_rule(&s)? {
            let pa = estimate_with_seed(model, &a, samples, nested_seed(cfg.seed, &s, &a))?.probability;
            if pa <= 0.0 {
                continue;
            }
            let conf = p / pa;
            if conf > cfg.min_confidence {
                let pb = estimate_with_seed(model, &b, samples, nested_seed(cfg.seed, &s, &b))?.probability;
                let lift = if pb > 0.0 { p / (pa * pb) } else { f64::INFINITY };
                rules.push(Rule { antecedent: a, consequent: b, support: p, confidence: conf, lift });
            }
        }
    }
    Ok(MiningOutput { itemsets, rules: normalize_rules(rules) })
}

/// Fit followed by [`mine_with_model`].
pub fn mine_gpar(
    x: &FeatureMatrix,
    data: &TransactionMatrix,
    spec: &KernelSpec,
    cfg: &MiningConfig,
    opts: &GparOptions,
) -> Result<(GpModel, MiningOutput)> {
    if data.n_items() > MAX_ITEMS {
        return Err(MineError::TooLarge { what: "item count for GPAR", limit: MAX_ITEMS, got: data.n_items() });
    }
    cfg.validate(data.n_items())?;
    let model = fit_gp(x, data, spec, opts)?;
    let out = mine_with_model(&model, cfg, opts.samples)?;
    Ok((model, out))
}

/// Adds one item with features `x_new` using the fitted kernel, without refitting.
pub fn extend_items(model: &GpModel, x_new: &[f64]) -> Result<GpModel> {
    if x_new.len() != model.features.dim() {
        return Err(MineError::InvalidData(format!(
            "new item has {} features, expected {}",
            x_new.len(),
            model.features.dim()
        )));
    }
    let m = model.n_items();
    let mut k = DMatrix::zeros(m + 1, m + 1);
    k.view_mut((0, 0), (m, m)).copy_from(&model.covariance.matrix);
    for i in 0..m {
        let v = kernel_eval(&model.spec, model.features.row(i), x_new)?;
        k[(i, m)] = v;
        k[(m, i)] = v;
    }
    k[(m, m)] = kernel_eval(&model.spec, x_new, x_new)? + model.spec.noise;
    let mut features = model.features.clone();
    features.push(x_new.to_vec(), None)?;
    let mut cov = CovarianceMatrix { matrix: k, provenance: model.covariance.provenance.clone() };
    let report = psd_check(&cov, PSD_TOL)?;
    if !report.is_psd {
        if model.repair || model.spec.kind == KernelKind::ShiftedRbf {
            cov = psd_repair(&cov)?;
        } else {
            return Err(MineError::NotPsd { min_eigenvalue: report.min_eigenvalue });
        }
    }
    let factor = sampling_factor(&cov.matrix)?;
    Ok(GpModel {
        spec: model.spec.clone(),
        features,
        covariance: cov,
        factor,
        log_likelihood: model.log_likelihood,
        repair: model.repair,
    })
}
