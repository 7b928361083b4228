//! Kernel functions, covariance construction, PSD tooling and orthant probabilities.

mod orthant;
mod psd;

pub use orthant::{bivariate_orthant, orthant_prob_analytic, orthant_prob_mc};
pub use psd::{psd_check, psd_repair, sampling_factor, PsdReport};

use crate::error::{MineError, Result};
use crate::features::FeatureMatrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Rbf,
    ShiftedRbf,
    Eimq,
    AbsoluteRbf,
    ArcsinNn,
    Ntk3,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Rbf => "rbf",
            KernelKind::ShiftedRbf => "shifted_rbf",
            KernelKind::Eimq => "eimq",
            KernelKind::AbsoluteRbf => "absolute_rbf",
            KernelKind::ArcsinNn => "arcsin_nn",
            KernelKind::Ntk3 => "ntk3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Rbf, Self::ShiftedRbf, Self::Eimq, Self::AbsoluteRbf, Self::ArcsinNn, Self::Ntk3]
            .into_iter()
            .find(|k| k.name() == s.replace('-', "_"))
    }
}

/// Kernel choice with its hyper-parameters. Only the fields relevant to
/// `kind` are read; `magnitude` scales every kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub magnitude: f64,
    pub length_scale: f64,
    /// Preferred distance of the shifted RBF.
    pub shift: f64,
    pub c: f64,
    pub beta: f64,
    /// Prior variances for (bias, x¹..x^d); a single value is broadcast.
    pub weight_prior: Vec<f64>,
    /// Hidden width of the three-layer NTK.
    pub width: f64,
    pub noise: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            kind: KernelKind::Rbf,
            magnitude: 1.0,
            length_scale: 1.0,
            shift: 0.0,
            c: 1.0,
            beta: 0.5,
            weight_prior: vec![1.0],
            width: 1.0,
            noise: 0.0,
        }
    }
}

impl KernelSpec {
    pub fn of(kind: KernelKind) -> Self {
        KernelSpec { kind, ..Default::default() }
    }

    pub fn rbf(magnitude: f64, length_scale: f64) -> Self {
        KernelSpec { kind: KernelKind::Rbf, magnitude, length_scale, ..Default::default() }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(MineError::Kernel(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("magnitude", self.magnitude)?;
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(MineError::Kernel(format!("noise must be non-negative, got {}", self.noise)));
        }
        match self.kind {
            KernelKind::Rbf | KernelKind::AbsoluteRbf => positive("length_scale", self.length_scale),
            KernelKind::ShiftedRbf => {
                positive("length_scale", self.length_scale)?;
                if self.shift >= 0.0 && self.shift.is_finite() {
                    Ok(())
                } else {
                    Err(MineError::Kernel(format!("shift must be non-negative, got {}", self.shift)))
                }
            }
            KernelKind::Eimq => {
                positive("c", self.c)?;
                positive("beta", self.beta)
            }
            KernelKind::ArcsinNn => {
                if self.weight_prior.is_empty() {
                    return Err(MineError::Kernel("weight_prior must not be empty".into()));
                }
                self.weight_prior.iter().try_for_each(|&v| positive("weight_prior", v))
            }
            KernelKind::Ntk3 => positive("width", self.width),
        }
    }

    /// Whether Gram matrices of this kind are guaranteed PSD.
    pub fn is_valid_kernel(&self) -> bool {
        matches!(self.kind, KernelKind::Rbf | KernelKind::ArcsinNn | KernelKind::Ntk3)
    }

    fn prior(&self, k: usize) -> f64 {
        if self.weight_prior.len() == 1 {
            self.weight_prior[0]
        } else {
            self.weight_prior[k]
        }
    }

    /// Σ-weighted inner product of the bias-augmented vectors.
    fn augmented_dot(&self, x: &[f64], y: &[f64]) -> f64 {
        self.prior(0) + x.iter().zip(y).enumerate().map(|(k, (a, b))| self.prior(k + 1) * a * b).sum::<f64>()
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Closed-form kernel value k(x, y).
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(MineError::Kernel(format!("dimension mismatch: {} vs {}", x.len(), y.len())));
    }
    if spec.kind == KernelKind::ArcsinNn && spec.weight_prior.len() != 1 && spec.weight_prior.len() != x.len() + 1 {
        return Err(MineError::Kernel(format!(
            "weight_prior has {} entries; expected 1 or {}",
            spec.weight_prior.len(),
            x.len() + 1
        )));
    }
    let l2 = spec.length_scale * spec.length_scale;
    let base = match spec.kind {
        KernelKind::Rbf => (-sq_dist(x, y) / (2.0 * l2)).exp(),
        KernelKind::AbsoluteRbf => (sq_dist(x, y) / (2.0 * l2)).exp(),
        KernelKind::ShiftedRbf => {
            let gap = sq_dist(x, y).sqrt() - spec.shift;
            (-gap * gap / (2.0 * l2)).exp()
        }
        KernelKind::Eimq => {
            let r = sq_dist(x, y) + spec.c * spec.c;
            (-1.0 / r.powf(spec.beta)).exp()
        }
        KernelKind::ArcsinNn => {
            let num = 2.0 * spec.augmented_dot(x, y);
            let den = ((1.0 + 2.0 * spec.augmented_dot(x, x)) * (1.0 + 2.0 * spec.augmented_dot(y, y))).sqrt();
            2.0 / PI * (num / den).clamp(-1.0, 1.0).asin()
        }
        KernelKind::Ntk3 => {
            let (nx, ny) = (dot(x, x).sqrt(), dot(y, y).sqrt());
            let xy = dot(x, y);
            // angle via the half-angle form, accurate near parallel and antiparallel inputs
            let theta = if nx == 0.0 || ny == 0.0 {
                PI / 2.0
            } else {
                let (mut diff, mut sum) = (0.0, 0.0);
                for (a, b) in x.iter().zip(y) {
                    let (u, v) = (a / nx, b / ny);
                    diff += (u - v) * (u - v);
                    sum += (u + v) * (u + v);
                }
                2.0 * diff.sqrt().atan2(sum.sqrt())
            };
            let arc = nx * ny / (2.0 * PI) * (theta.sin() + theta.cos() * (PI - theta));
            spec.width * (arc + (0.5 - theta / (2.0 * PI)) * xy)
        }
    };
    Ok(spec.magnitude * base)
}

/// Where a covariance matrix came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kernel: KernelSpec,
    pub feature_digest: u64,
    pub repaired: bool,
}

/// Symmetric M×M covariance with an optional record of its origin.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    pub matrix: DMatrix<f64>,
    pub provenance: Option<Provenance>,
}

impl CovarianceMatrix {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        CovarianceMatrix { matrix, provenance: None }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Principal sub-matrix on the given indices.
    pub fn submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.matrix[(idx[a], idx[b])])
    }
}

/// Gram matrix K[i,j] = k(x_i, x_j), with the noise variance on the diagonal if requested.
pub fn build_covariance(spec: &KernelSpec, x: &FeatureMatrix, add_noise: bool) -> Result<CovarianceMatrix> {
    spec.validate()?;
    let m = x.n_items();
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = kernel_eval(spec, x.row(i), x.row(j))?;
            if !v.is_finite() {
                return Err(MineError::Numerical(format!("kernel value for pair ({i},{j}) is {v}")));
            }
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        if add_noise {
            k[(i, i)] += spec.noise;
        }
    }
    Ok(CovarianceMatrix {
        matrix: k,
        provenance: Some(Provenance { kernel: spec.clone(), feature_digest: x.digest(), repaired: false }),
    })
}
