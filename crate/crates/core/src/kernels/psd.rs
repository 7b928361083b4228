use super::CovarianceMatrix;
use crate::error::{MineError, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Relative band below zero in which eigenvalues count as zero.
const ZERO_BAND: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

fn check_symmetric(k: &DMatrix<f64>) -> Result<()> {
    if k.nrows() != k.ncols() {
        return Err(MineError::InvalidData(format!("matrix is {}x{}, not square", k.nrows(), k.ncols())));
    }
    for i in 0..k.nrows() {
        for j in i + 1..k.ncols() {
            let (a, b) = (k[(i, j)], k[(j, i)]);
            let gap = (a - b).abs();
            if gap > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(MineError::NonSymmetric { row: i, col: j, gap });
            }
        }
    }
    Ok(())
}

fn eigen(k: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    check_symmetric(k)?;
    if k.iter().any(|v| !v.is_finite()) {
        return Err(MineError::Numerical("matrix has non-finite entries".into()));
    }
    Ok(SymmetricEigen::new(k.clone()))
}

/// PSD test: min eigenvalue ≥ −tol·max(1, max eigenvalue).
pub fn psd_check(k: &CovarianceMatrix, tol: f64) -> Result<PsdReport> {
    let e = eigen(&k.matrix)?;
    let min = e.eigenvalues.min();
    let max = e.eigenvalues.max();
    Ok(PsdReport { is_psd: min >= -tol * max.max(1.0), min_eigenvalue: min, max_eigenvalue: max })
}

/// Projects onto the PSD cone by clipping non-positive eigenvalues to zero.
pub fn psd_repair(k: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    let e = eigen(&k.matrix)?;
    let clipped = e.eigenvalues.map(|l| if l > 0.0 { l } else { 0.0 });
    let q = &e.eigenvectors;
    let r = q * DMatrix::from_diagonal(&clipped) * q.transpose();
    let sym = (&r + r.transpose()) * 0.5;
    let mut provenance = k.provenance.clone();
    if let Some(p) = provenance.as_mut() {
        p.repaired = true;
    }
    Ok(CovarianceMatrix { matrix: sym, provenance })
}

/// A factor L with L·Lᵀ = K for drawing N(0, K) samples.
///
/// Uses Cholesky when K is positive definite and falls back to the scaled
/// eigenbasis for singular PSD matrices.
pub fn sampling_factor(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(ch) = k.clone().cholesky() {
        return Ok(ch.l());
    }
    let e = eigen(k)?;
    let max = e.eigenvalues.max().max(1.0);
    let min = e.eigenvalues.min();
    if min < -ZERO_BAND * max {
        return Err(MineError::NotPsd { min_eigenvalue: min });
    }
    let roots = e.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&e.eigenvectors * DMatrix::from_diagonal(&roots))
}
