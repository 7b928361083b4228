use armine::kernels::{
    build_covariance, kernel_eval, orthant_prob_analytic, orthant_prob_mc, psd_check, psd_repair, CovarianceMatrix,
    KernelKind, KernelSpec,
};
use armine::{FeatureMatrix, MineError};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn line(points: &[f64]) -> FeatureMatrix {
    FeatureMatrix::new(points.iter().map(|&p| vec![p]).collect()).unwrap()
}

fn random_features(rng: &mut ChaCha8Rng, m: usize, d: usize) -> FeatureMatrix {
    FeatureMatrix::new((0..m).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()).unwrap()
}

#[test]
fn rbf_self_similarity() {
    let spec = KernelSpec::rbf(1.0, 1.0);
    for x in [[0.0, 0.0], [3.5, -1.0], [1e3, 2.0]] {
        assert_eq!(kernel_eval(&spec, &x, &x).unwrap(), 1.0);
    }
    let scaled = KernelSpec::rbf(2.5, 0.7);
    let v = kernel_eval(&scaled, &[0.0], &[1.0]).unwrap();
    assert!((v - 2.5 * (-1.0f64 / (2.0 * 0.49)).exp()).abs() < 1e-15);
}

#[test]
fn ntk_reference_points() {
    let m = 3.0;
    let spec = KernelSpec { width: m, ..KernelSpec::of(KernelKind::Ntk3) };
    let x = [0.6, 0.8];
    assert!((kernel_eval(&spec, &x, &x).unwrap() - m).abs() < 1e-12);
    let y = [-0.8, 0.6];
    assert!((kernel_eval(&spec, &x, &y).unwrap() - m / (2.0 * PI)).abs() < 1e-12);
    assert_eq!(kernel_eval(&spec, &[0.0, 0.0], &x).unwrap(), 0.0);
}

#[test]
fn eimq_limits() {
    let spec = KernelSpec { c: 0.001f64.sqrt(), beta: 0.5, ..KernelSpec::of(KernelKind::Eimq) };
    let far = kernel_eval(&spec, &[0.0], &[1e8]).unwrap();
    assert!((far - 1.0).abs() < 1e-6);
    let near = kernel_eval(&spec, &[0.0], &[0.0]).unwrap();
    let expected = (-(0.001f64).powf(-0.5)).exp();
    assert!((near - expected).abs() < 1e-15);
}

#[test]
fn arcsin_hand_computed() {
    let spec = KernelSpec::of(KernelKind::ArcsinNn);
    // x̃ = (1, 1), ỹ = (1, 2), Σ = I
    let expected = 2.0 / PI * (2.0 * 3.0 / ((1.0 + 2.0 * 2.0) * (1.0 + 2.0 * 5.0f64)).sqrt()).asin();
    assert!((kernel_eval(&spec, &[1.0], &[2.0]).unwrap() - expected).abs() < 1e-15);
    let bad = KernelSpec { weight_prior: vec![1.0, 1.0, 1.0], ..spec };
    assert!(kernel_eval(&bad, &[1.0], &[2.0]).is_err());
}

#[test]
fn dimension_mismatch() {
    assert!(matches!(kernel_eval(&KernelSpec::default(), &[1.0], &[1.0, 2.0]), Err(MineError::Kernel(_))));
}

#[test]
fn covariance_construction() {
    let same = FeatureMatrix::new(vec![vec![1.0, 2.0]; 3]).unwrap();
    let spec = KernelSpec::rbf(2.0, 1.0).with_noise(0.1);
    let k = build_covariance(&spec, &same, true).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(k.matrix[(i, j)], if i == j { 2.1 } else { 2.0 });
        }
    }
    let no_noise = build_covariance(&spec, &same, false).unwrap();
    assert_eq!(no_noise.matrix[(0, 0)], 2.0);
}

#[test]
fn rbf_vs_absolute_rbf_on_a_line() {
    let x = line(&[0.0, 1.0, 2.0, 3.0]);
    let rbf = build_covariance(&KernelSpec::rbf(1.0, 1.0), &x, false).unwrap();
    assert!(psd_check(&rbf, 1e-10).unwrap().is_psd);
    let abs = build_covariance(&KernelSpec::of(KernelKind::AbsoluteRbf), &x, false).unwrap();
    // the leading 2×2 minor has determinant 1 − e < 0, so the matrix cannot be PSD
    let minor = abs.matrix[(0, 0)] * abs.matrix[(1, 1)] - abs.matrix[(0, 1)] * abs.matrix[(1, 0)];
    assert!(minor < 0.0);
    let report = psd_check(&abs, 1e-10).unwrap();
    assert!(!report.is_psd);
    assert!(report.min_eigenvalue < 0.0);
}

#[test]
fn shifted_rbf_fails_then_repairs() {
    let x = line(&[0.0, 1.0, 2.0, 3.0, 4.5]);
    let spec = KernelSpec { shift: 2.0, length_scale: 0.3, ..KernelSpec::of(KernelKind::ShiftedRbf) };
    let k = build_covariance(&spec, &x, false).unwrap();
    assert!(!psd_check(&k, 1e-10).unwrap().is_psd);
    let fixed = psd_repair(&k).unwrap();
    let report = psd_check(&fixed, 1e-10).unwrap();
    assert!(report.is_psd);
    assert!(report.min_eigenvalue >= -1e-10);
    assert!(fixed.provenance.unwrap().repaired);
}

#[test]
fn psd_check_identity_and_asymmetry() {
    let id = CovarianceMatrix::from_matrix(DMatrix::identity(4, 4));
    let r = psd_check(&id, 1e-10).unwrap();
    assert!(r.is_psd);
    assert!((r.min_eigenvalue - 1.0).abs() < 1e-14);
    let asym = CovarianceMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]));
    assert!(matches!(psd_check(&asym, 1e-10), Err(MineError::NonSymmetric { .. })));
}

#[test]
fn repair_examples() {
    let k = CovarianceMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
    let r = psd_repair(&k).unwrap();
    assert!((r.matrix.clone() - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).abs().max() < 1e-14);
    let x = line(&[0.0, 0.5, 2.0]);
    let psd = build_covariance(&KernelSpec::rbf(1.0, 1.0), &x, false).unwrap();
    assert!((psd_repair(&psd).unwrap().matrix - psd.matrix).abs().max() < 1e-10);
}

#[test]
fn repair_is_nearest_in_shared_eigenbasis() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let a = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let k = (&a + a.transpose()) * 0.5;
        let repaired = psd_repair(&CovarianceMatrix::from_matrix(k.clone())).unwrap().matrix;
        let ours = (&repaired - &k).norm();
        let eig = k.clone().symmetric_eigen();
        let q = eig.eigenvectors.clone();
        let top = eig.eigenvalues.max().max(0.0) + 0.5;
        let steps = 30;
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=steps {
                for l in 0..=steps {
                    let mu = [i, j, l].map(|s| top * s as f64 / steps as f64);
                    let cand = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&mu)) * q.transpose();
                    best = best.min((cand - &k).norm());
                }
            }
        }
        assert!(ours <= best + 1e-12, "ours {ours} grid best {best}");
    }
}

#[test]
fn orthant_analytic_examples() {
    let cov = |rho: f64| DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
    assert_eq!(orthant_prob_analytic(&cov(0.0)).unwrap(), 0.25);
    assert!((orthant_prob_analytic(&cov(1.0)).unwrap() - 0.5).abs() < 1e-15);
    assert!(orthant_prob_analytic(&cov(-1.0)).unwrap().abs() < 1e-15);
    assert_eq!(orthant_prob_analytic(&DMatrix::from_element(1, 1, 3.0)).unwrap(), 0.5);
    // unnormalized covariance: ρ = 1 / √(2·2)
    let scaled = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
    assert!((orthant_prob_analytic(&scaled).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!(orthant_prob_analytic(&cov(1.5)).is_err());
    assert!(orthant_prob_analytic(&DMatrix::identity(3, 3)).is_err());
}

#[test]
fn orthant_analytic_monotone() {
    let vals: Vec<f64> = (0..=100)
        .map(|s| {
            let rho = -1.0 + 2.0 * s as f64 / 100.0;
            orthant_prob_analytic(&DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0])).unwrap()
        })
        .collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn orthant_mc_independent_triple() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = 200_000;
    let (p, se) = orthant_prob_mc(&DMatrix::identity(3, 3), s, &mut rng).unwrap();
    let sigma = (0.125f64 * 0.875 / s as f64).sqrt();
    assert!((p - 0.125).abs() < 3.0 * sigma, "p = {p}");
    assert!((se - (p * (1.0 - p) / s as f64).sqrt()).abs() < 1e-15);
}

#[test]
fn orthant_mc_singular_psd_and_non_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // rank-one covariance: all coordinates share a sign
    let ones = DMatrix::from_element(3, 3, 1.0);
    let (p, _) = orthant_prob_mc(&ones, 20_000, &mut rng).unwrap();
    assert!((p - 0.5).abs() < 3.0 * (0.25f64 / 20_000.0).sqrt());
    let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(matches!(orthant_prob_mc(&bad, 10, &mut rng), Err(MineError::NotPsd { .. })));
}

#[test]
fn spec_json_defaults() {
    let spec: KernelSpec = serde_json::from_str(r#"{"kind":"shifted_rbf","shift":1.5}"#).unwrap();
    assert_eq!(spec.kind, KernelKind::ShiftedRbf);
    assert_eq!(spec.shift, 1.5);
    assert_eq!(spec.length_scale, 1.0);
    assert!(KernelSpec { length_scale: 0.0, ..spec.clone() }.validate().is_err());
    assert!(KernelSpec { shift: -1.0, ..spec }.validate().is_err());
}

fn all_specs() -> Vec<KernelSpec> {
    vec![
        KernelSpec::rbf(1.3, 0.8),
        KernelSpec { shift: 1.0, ..KernelSpec::of(KernelKind::ShiftedRbf) },
        KernelSpec { c: 0.5, beta: 0.7, ..KernelSpec::of(KernelKind::Eimq) },
        KernelSpec::of(KernelKind::AbsoluteRbf),
        KernelSpec { weight_prior: vec![0.5, 2.0, 1.0, 0.3], ..KernelSpec::of(KernelKind::ArcsinNn) },
        KernelSpec { width: 4.0, ..KernelSpec::of(KernelKind::Ntk3) },
    ]
}

proptest! {
    #[test]
    fn kernels_symmetric(x in proptest::collection::vec(-3.0f64..3.0, 3), y in proptest::collection::vec(-3.0f64..3.0, 3)) {
        for spec in all_specs() {
            let a = kernel_eval(&spec, &x, &y).unwrap();
            let b = kernel_eval(&spec, &y, &x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn valid_kernels_give_psd_grams(seed in any::<u64>(), m in 1usize..=20, d in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_features(&mut rng, m, d);
        for spec in [KernelSpec::rbf(1.0, 1.0), KernelSpec::of(KernelKind::ArcsinNn), KernelSpec { width: 2.0, ..KernelSpec::of(KernelKind::Ntk3) }] {
            let k = build_covariance(&spec, &x, false).unwrap();
            prop_assert!(psd_check(&k, 1e-8).unwrap().is_psd, "{:?}", spec.kind);
        }
    }

    #[test]
    fn repair_output_passes(seed in any::<u64>(), m in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-2.0..2.0));
        let k = CovarianceMatrix::from_matrix((&a + a.transpose()) * 0.5);
        let r = psd_repair(&k).unwrap();
        prop_assert!(psd_check(&r, 1e-10).unwrap().is_psd);
    }
}
