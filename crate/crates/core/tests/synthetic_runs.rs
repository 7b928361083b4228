//! Miners on the regenerated Synthetic-1 data, checked against loose bands.

use armine::bandit::{mine_mab, MabConfig};
use armine::barm::{mine_barm_free, uniform_priors};
use armine::data::{gen_synthetic1, Synthetic1Spec};
use armine::gpar::{fit_gp, mine_with_model, GparOptions};
use armine::kernels::KernelSpec;
use armine::MiningConfig;

const SWEEP: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

#[test]
fn gp_length_scale_band() {
    for seed in [1u64, 2, 3, 42] {
        let (t, x) = gen_synthetic1(&Synthetic1Spec::default(), seed).unwrap();
        let model = fit_gp(&x, &t, &KernelSpec::rbf(1.0, 1.0), &GparOptions::default()).unwrap();
        let ell = model.spec.length_scale;
        assert!((1.0..=50.0).contains(&ell), "seed {seed}: length scale {ell}");
    }
}

#[test]
fn gp_counts_shrink_with_threshold() {
    let (t, x) = gen_synthetic1(&Synthetic1Spec::default(), 42).unwrap();
    let model = fit_gp(&x, &t, &KernelSpec::rbf(1.0, 1.0), &GparOptions::default()).unwrap();
    let counts: Vec<(usize, usize)> = SWEEP
        .iter()
        .map(|&s| {
            let out = mine_with_model(&model, &MiningConfig::new(s, 0.5, 10).with_seed(42), 1000).unwrap();
            (out.itemsets.len(), out.rules.len())
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[1].0 <= w[0].0 && w[1].1 <= w[0].1), "{counts:?}");
    assert!(counts[0].0 > 10 * counts[4].0.max(1));
}

#[test]
fn barm_desk_point() {
    let (t, _) = gen_synthetic1(&Synthetic1Spec::default(), 42).unwrap();
    let cfg = MiningConfig::new(0.5, 0.5, 10).with_seed(42);
    let out = mine_barm_free(&t, &uniform_priors(10), &cfg, 10_000).unwrap();
    let n = out.output.itemsets.len();
    assert!((22..=66).contains(&n), "{n} itemsets");
}

#[test]
fn mab_desk_point() {
    let (t, _) = gen_synthetic1(&Synthetic1Spec::default(), 42).unwrap();
    let cfg = MiningConfig::new(0.1, 0.5, 10);
    assert!(t.item_counts().iter().all(|&c| c > 100));
    let out = mine_mab(&t, &cfg, &MabConfig::new(1024, 10)).unwrap();
    assert_eq!(out.output.itemsets.len(), 1013);
}
