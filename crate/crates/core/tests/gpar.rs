mod common;

use armine::gpar::{
    estimate_cooccurrence, extend_items, fit_gp, log_likelihood, mine_gpar, mine_with_model, EstimateMethod,
    GparOptions, GpModel,
};
use armine::kernels::{orthant_prob_mc, KernelKind, KernelSpec};
use armine::{FeatureMatrix, Itemset, MineError, MiningConfig, TransactionMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Items on a line; transactions from a thresholded latent walk so nearby items co-occur.
fn correlated_data(seed: u64, n: usize, m: usize) -> (FeatureMatrix, TransactionMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = FeatureMatrix::new((0..m).map(|j| vec![j as f64]).collect()).unwrap();
    let rows: Vec<Vec<bool>> = (0..n)
        .map(|_| {
            let mut z: f64 = rng.random_range(-1.0..1.0);
            (0..m)
                .map(|_| {
                    z = 0.8 * z + 0.6 * rng.random_range(-1.0..1.0);
                    z > 0.0
                })
                .collect()
        })
        .collect();
    (x, TransactionMatrix::from_rows(&rows).unwrap())
}

#[test]
fn one_item_variance_matches_mle() {
    let rows: Vec<Vec<u8>> = (0..40).map(|r| vec![u8::from(r % 5 < 3)]).collect();
    let data = TransactionMatrix::from_binary(&rows).unwrap();
    let x = FeatureMatrix::new(vec![vec![0.0]]).unwrap();
    let model = fit_gp(&x, &data, &KernelSpec::rbf(1.0, 1.0).with_noise(0.1), &GparOptions::default()).unwrap();
    let fitted = model.spec.magnitude + model.spec.noise;
    // grid oracle for the one-dimensional Gaussian: maximize −S/(2v) − N/2·log v
    let (n, s) = (40.0, 24.0);
    let f = |v: f64| -s / (2.0 * v) - n / 2.0 * v.ln();
    let best = (1..=10_000).map(|k| k as f64 * 1e-4).max_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
    assert!((best - 0.6).abs() < 1e-4);
    assert!((fitted - best).abs() < 1e-3, "fitted {fitted}");
    assert!((model.covariance.matrix[(0, 0)] - fitted).abs() < 1e-12);
}

#[test]
fn fixed_parameters_single_transaction_density() {
    let data = TransactionMatrix::from_binary(&[vec![1, 0, 1]]).unwrap();
    let x = FeatureMatrix::new(vec![vec![0.0], vec![0.7], vec![2.0]]).unwrap();
    let spec = KernelSpec::rbf(1.5, 0.9).with_noise(0.2);
    let opts = GparOptions { fit_iterations: 0, ..Default::default() };
    let model = fit_gp(&x, &data, &spec, &opts).unwrap();
    assert_eq!(model.spec, spec);
    // direct density with an explicit inverse and determinant
    let k = DMatrix::from_fn(3, 3, |i, j| {
        let d = x.row(i)[0] - x.row(j)[0];
        1.5 * (-d * d / (2.0 * 0.81)).exp() + if i == j { 0.2 } else { 0.0 }
    });
    let t = nalgebra::DVector::from_row_slice(&[1.0, 0.0, 1.0]);
    let quad = (t.transpose() * k.clone().try_inverse().unwrap() * &t)[(0, 0)];
    let expected = -0.5 * quad - 0.5 * k.determinant().ln() - 1.5 * (2.0 * PI).ln();
    assert!((model.log_likelihood - expected).abs() < 1e-10);
    assert!((log_likelihood(&spec, &x, &data, false).unwrap() - expected).abs() < 1e-10);
}

#[test]
fn fit_beats_audit_grid() {
    let (x, data) = correlated_data(3, 150, 6);
    let model = fit_gp(&x, &data, &KernelSpec::rbf(1.0, 1.0).with_noise(0.1), &GparOptions::default()).unwrap();
    let grid = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0];
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                let spec = KernelSpec::rbf(f64::exp(a), f64::exp(b)).with_noise(f64::exp(c));
                if let Some(v) = log_likelihood(&spec, &x, &data, false) {
                    assert!(model.log_likelihood >= v - 1e-9, "grid point ({a},{b},{c}) gives {v} > {}", model.log_likelihood);
                }
            }
        }
    }
}

#[test]
fn factor_reproduces_covariance() {
    let (x, data) = correlated_data(4, 80, 5);
    let model = fit_gp(&x, &data, &KernelSpec::rbf(1.0, 1.0).with_noise(0.05), &GparOptions::default()).unwrap();
    let rebuilt = &model.factor * model.factor.transpose();
    let rel = (&rebuilt - &model.covariance.matrix).norm() / model.covariance.matrix.norm();
    assert!(rel < 1e-8);
}

#[test]
fn refuses_non_psd_kernel_without_repair() {
    let (x, data) = correlated_data(5, 50, 4);
    let spec = KernelSpec { length_scale: 0.5, ..KernelSpec::of(KernelKind::AbsoluteRbf) };
    let err = fit_gp(&x, &data, &spec, &GparOptions::default()).unwrap_err();
    assert!(matches!(err, MineError::NotPsd { .. }));
    let opts = GparOptions { repair: true, fit_iterations: 20, ..Default::default() };
    assert!(fit_gp(&x, &data, &spec, &opts).is_ok());
    // shifted RBF is always repaired
    let shifted = KernelSpec { shift: 1.0, length_scale: 0.5, ..KernelSpec::of(KernelKind::ShiftedRbf) };
    assert!(fit_gp(&x, &data, &shifted, &GparOptions { fit_iterations: 20, ..Default::default() }).is_ok());
}

fn identity_model(m: usize) -> GpModel {
    let x = FeatureMatrix::new((0..m).map(|j| vec![j as f64]).collect()).unwrap();
    GpModel::from_covariance(DMatrix::identity(m, m), x).unwrap()
}

#[test]
fn cooccurrence_examples() {
    let model = identity_model(3);
    let one = estimate_cooccurrence(&model, &Itemset::from_items([1]), 10, 0).unwrap();
    assert_eq!(one.probability, 0.5);
    assert_eq!(one.method, EstimateMethod::Analytic);
    let s = 200_000;
    let three = estimate_cooccurrence(&model, &Itemset::from_items([0, 1, 2]), s, 42).unwrap();
    let sigma = (0.125f64 * 0.875 / s as f64).sqrt();
    assert!((three.probability - 0.125).abs() < 3.0 * sigma);
    assert_eq!(three.method, EstimateMethod::MonteCarlo);
    assert!((three.std_error - (three.probability * (1.0 - three.probability) / s as f64).sqrt()).abs() < 1e-15);

    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
    let x = FeatureMatrix::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let pair = GpModel::from_covariance(cov.clone(), x).unwrap();
    let analytic = estimate_cooccurrence(&pair, &Itemset::from_items([0, 1]), 1, 0).unwrap().probability;
    assert!((analytic - 1.0 / 3.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mc, _) = orthant_prob_mc(&cov, 20_000, &mut rng).unwrap();
    assert!((mc - analytic).abs() < 3.0 * (analytic * (1.0 - analytic) / 20_000.0).sqrt());
    assert!(estimate_cooccurrence(&pair, &Itemset::from_items([0, 1]), 0, 0).is_err());
    assert!(estimate_cooccurrence(&pair, &Itemset::from_items([2]), 10, 0).is_err());
}

#[test]
fn independent_items_give_all_pair_rules() {
    let model = identity_model(3);
    let mut cfg = MiningConfig::new(0.2, 0.4, 3);
    cfg.seed = 1;
    let out = mine_with_model(&model, &cfg, 100_000).unwrap();
    assert_eq!(out.itemsets.len(), 3);
    assert!(out.itemsets.itemsets().all(|s| s.len() == 2));
    assert_eq!(out.rules.len(), 6);
    for r in &out.rules {
        assert!((r.support - 0.25).abs() < 1e-12);
        assert!((r.confidence - 0.5).abs() < 1e-12);
        assert!((r.lift - 1.0).abs() < 1e-12);
    }
}

#[test]
fn threshold_at_one_keeps_nothing() {
    let model = identity_model(4);
    let out = mine_with_model(&model, &MiningConfig::new(1.0, 0.5, 4), 100).unwrap();
    assert!(out.itemsets.is_empty() && out.rules.is_empty());
}

#[test]
fn mining_is_deterministic_and_roughly_monotone() {
    let (x, data) = correlated_data(6, 200, 6);
    let cfg = MiningConfig::new(0.05, 0.3, 6).with_seed(99);
    let opts = GparOptions { samples: 4000, ..Default::default() };
    let (m1, a) = mine_gpar(&x, &data, &KernelSpec::rbf(1.0, 1.0).with_noise(0.1), &cfg, &opts).unwrap();
    let (_, b) = mine_gpar(&x, &data, &KernelSpec::rbf(1.0, 1.0).with_noise(0.1), &cfg, &opts).unwrap();
    assert_eq!(a, b);
    // sampled p(I) never exceeds p(A) by more than 4σ
    for (s, p) in a.itemsets.iter() {
        for &drop in s.items() {
            let sub = Itemset::from_items(s.items().iter().copied().filter(|&i| i != drop));
            let e = estimate_cooccurrence(&m1, &sub, 4000, cfg.seed).unwrap();
            let sigma = (p * (1.0 - p) / 4000.0).sqrt() + e.std_error;
            assert!(p <= e.probability + 4.0 * sigma + 1e-12, "{s}: {p} vs {sub}: {}", e.probability);
        }
    }
}

#[test]
fn too_many_items() {
    let (x, data) = correlated_data(7, 20, 21);
    let err = mine_gpar(&x, &data, &KernelSpec::rbf(1.0, 1.0), &MiningConfig::new(0.5, 0.5, 3), &GparOptions::default())
        .unwrap_err();
    assert!(matches!(err, MineError::TooLarge { .. }));
}

#[test]
fn extending_items() {
    let (x, data) = correlated_data(8, 100, 4);
    let model = fit_gp(&x, &data, &KernelSpec::rbf(1.0, 1.0).with_noise(0.1), &GparOptions::default()).unwrap();
    let dup = extend_items(&model, &[2.0]).unwrap();
    assert_eq!(dup.n_items(), 5);
    let old = &model.covariance.matrix;
    assert_eq!(dup.covariance.submatrix(&[0, 1, 2, 3]), *old);
    for i in 0..4 {
        if i != 2 {
            assert!((dup.covariance.matrix[(4, i)] - old[(2, i)]).abs() < 1e-12);
        }
    }
    assert!((dup.covariance.matrix[(4, 2)] - (old[(2, 2)] - model.spec.noise)).abs() < 1e-12);
    assert!((dup.covariance.matrix[(4, 4)] - old[(2, 2)]).abs() < 1e-12);

    let far = extend_items(&model, &[1e6]).unwrap();
    assert_eq!(estimate_cooccurrence(&far, &Itemset::from_items([4]), 10, 0).unwrap().probability, 0.5);
    let p = estimate_cooccurrence(&far, &Itemset::from_items([0, 4]), 10, 0).unwrap().probability;
    assert!((p - 0.25).abs() < 1e-12);
    assert!(extend_items(&model, &[1.0, 2.0]).is_err());
}
