use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{MineError, Result};
use crate::features::FeatureMatrix;
use crate::kernels::{build_covariance, KernelSpec};
use crate::transactions::TransactionMatrix;

/// Items with standard-normal features; each transaction keeps the items whose
/// latent draw from N(0, K_rbf) is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Synthetic1Spec {
    pub n_items: usize,
    pub dim: usize,
    pub n_transactions: usize,
    pub length_scale: f64,
}

impl Default for Synthetic1Spec {
    fn default() -> Self {
        Synthetic1Spec { n_items: 10, dim: 10, n_transactions: 1000, length_scale: 10.0 }
    }
}

/// Items drawn around cluster centroids; each transaction mixes items from several clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Synthetic2Spec {
    pub centroids: Vec<Vec<f64>>,
    pub items_per_cluster: usize,
    pub n_transactions: usize,
    /// Standard deviation of item features around their centroid.
    pub spread: f64,
    pub min_size: usize,
    pub max_size: usize,
    pub min_clusters: usize,
    pub max_clusters: usize,
}

impl Default for Synthetic2Spec {
    fn default() -> Self {
        let d = 10;
        let mut second = vec![0.0; d];
        second[0] = 5.0;
        Synthetic2Spec {
            centroids: vec![vec![0.0; d], second, vec![20.0; d]],
            items_per_cluster: 5,
            n_transactions: 1000,
            spread: 1.0,
            min_size: 2,
            max_size: 6,
            min_clusters: 2,
            max_clusters: 3,
        }
    }
}

impl Synthetic2Spec {
    pub fn n_items(&self) -> usize {
        self.centroids.len() * self.items_per_cluster
    }

    pub fn cluster_of(&self, item: usize) -> usize {
        item / self.items_per_cluster
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(MineError::InvalidConfig(m));
        let k = self.centroids.len();
        if k == 0 || self.items_per_cluster == 0 || self.n_transactions == 0 {
            return bad("need at least one cluster, item and transaction".into());
        }
        let d = self.centroids[0].len();
        if d == 0 || self.centroids.iter().any(|c| c.len() != d || c.iter().any(|v| !v.is_finite())) {
            return bad("centroids must share one positive dimension and be finite".into());
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return bad(format!("spread must be non-negative, got {}", self.spread));
        }
        if self.min_size == 0 || self.min_size > self.max_size {
            return bad(format!("bad size range [{}, {}]", self.min_size, self.max_size));
        }
        if self.min_clusters == 0 || self.min_clusters > self.max_clusters || self.max_clusters > k {
            return bad(format!("bad cluster range [{}, {}] for {k} clusters", self.min_clusters, self.max_clusters));
        }
        if self.min_size < self.min_clusters {
            return bad("min_size must cover min_clusters".into());
        }
        if self.max_size > self.min_clusters * self.items_per_cluster {
            return bad("max_size exceeds the items available in min_clusters clusters".into());
        }
        Ok(())
    }
}

fn normal_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

fn labels(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("item_{i}")).collect()
}

pub fn gen_synthetic1(spec: &Synthetic1Spec, seed: u64) -> Result<(TransactionMatrix, FeatureMatrix)> {
    let Synthetic1Spec { n_items: m, dim, n_transactions: n, length_scale } = *spec;
    if m == 0 || dim == 0 || n == 0 {
        return Err(MineError::InvalidConfig("items, dimension and transactions must be positive".into()));
    }
    if m > 64 {
        return Err(MineError::TooLarge { what: "synthetic item count", limit: 64, got: m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..m).map(|_| normal_vec(&mut rng, dim)).collect();
    let features = FeatureMatrix::new(rows)?.with_labels(labels(m))?;
    let k = build_covariance(&KernelSpec::rbf(1.0, length_scale), &features, false)?.matrix;
    let chol = match Cholesky::new(k.clone()) {
        Some(c) => c,
        None => Cholesky::new(&k + DMatrix::identity(m, m) * 1e-8)
            .ok_or_else(|| MineError::Numerical("generator covariance is not positive definite after jitter".into()))?,
    };
    let lower = chol.l();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = &lower * DVector::from_vec(normal_vec(&mut rng, m));
        let row: Vec<bool> = z.iter().map(|v| *v > 0.0).collect();
        if row.iter().any(|&b| b) {
            out.push(row);
        }
    }
    Ok((TransactionMatrix::from_rows_with_labels(&out, labels(m))?, features))
}

pub fn gen_synthetic2(spec: &Synthetic2Spec, seed: u64) -> Result<(TransactionMatrix, FeatureMatrix)> {
    spec.validate()?;
    let m = spec.n_items();
    if m > 64 {
        return Err(MineError::TooLarge { what: "synthetic item count", limit: 64, got: m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spec.centroids[0].len();
    let mut rows = Vec::with_capacity(m);
    for item in 0..m {
        let c = &spec.centroids[spec.cluster_of(item)];
        let noise = normal_vec(&mut rng, d);
        rows.push(c.iter().zip(noise).map(|(mu, e)| mu + spec.spread * e).collect());
    }
    let features = FeatureMatrix::new(rows)?.with_labels(labels(m))?;
    let k = spec.centroids.len();
    let per = spec.items_per_cluster;
    let mut out = Vec::with_capacity(spec.n_transactions);
    for _ in 0..spec.n_transactions {
        let size = rng.random_range(spec.min_size..=spec.max_size);
        let n_clusters = rng.random_range(spec.min_clusters..=spec.max_clusters).min(size);
        let clusters = index::sample(&mut rng, k, n_clusters).into_vec();
        let mut row = vec![false; m];
        // one item from each chosen cluster, then fill from the pooled remainder
        let mut pool = Vec::new();
        for &c in &clusters {
            let pick = rng.random_range(0..per);
            row[c * per + pick] = true;
            pool.extend((0..per).filter(|&i| i != pick).map(|i| c * per + i));
        }
        for i in index::sample(&mut rng, pool.len(), size - n_clusters) {
            row[pool[i]] = true;
        }
        out.push(row);
    }
    Ok((TransactionMatrix::from_rows_with_labels(&out, labels(m))?, features))
}
