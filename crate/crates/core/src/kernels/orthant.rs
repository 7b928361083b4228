use super::psd::sampling_factor;
use crate::error::{MineError, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// P(z₁ > 0, z₂ > 0) for a standard bivariate normal with correlation ρ.
pub fn bivariate_orthant(rho: f64) -> f64 {
    0.25 + rho.asin() / (2.0 * PI)
}

/// Closed-form positive-orthant probability for one or two dimensions.
pub fn orthant_prob_analytic(k: &DMatrix<f64>) -> Result<f64> {
    match k.nrows() {
        1 => {
            if k[(0, 0)] <= 0.0 {
                return Err(MineError::InvalidData("variance must be positive".into()));
            }
            Ok(0.5)
        }
        2 => {
            let (a, b) = (k[(0, 0)], k[(1, 1)]);
            if a <= 0.0 || b <= 0.0 {
                return Err(MineError::InvalidData("variances must be positive".into()));
            }
            let rho = k[(0, 1)] / (a * b).sqrt();
            let slack = 1e-12;
            if rho.abs() > 1.0 + slack || !rho.is_finite() {
                return Err(MineError::InvalidData(format!("correlation {rho} outside [-1, 1]")));
            }
            Ok(bivariate_orthant(rho.clamp(-1.0, 1.0)))
        }
        n => Err(MineError::InvalidData(format!("analytic orthant probability needs size 1 or 2, got {n}"))),
    }
}

/// Monte Carlo positive-orthant probability of N(0, K) from `samples` draws.
///
/// Returns (estimate, binomial standard error).
pub fn orthant_prob_mc<R: Rng>(k: &DMatrix<f64>, samples: usize, rng: &mut R) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(MineError::InvalidConfig("sample count must be at least 1".into()));
    }
    let l = sampling_factor(k)?;
    let m = k.nrows();
    let mut eps = DVector::zeros(m);
    let mut z = DVector::zeros(m);
    let mut hits = 0usize;
    for _ in 0..samples {
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        l.mul_to(&eps, &mut z);
        if z.iter().all(|&v| v > 0.0) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok((p, (p * (1.0 - p) / samples as f64).sqrt()))
}
