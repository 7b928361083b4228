mod common;

use armine::classic::mine_apriori;
use armine::rlar::{
    extract_rules, mine_rlar, td_target, train_dqn, write_reward_trace, Mlp, ReplayBuffer, RewardWeights, RlarEnv,
    Sample, StepEnd, TrainConfig, Transition,
};
use armine::{MiningConfig, TransactionMatrix};
use common::{brute_count, random_matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 70 rows over two items: 36 with both, 4 with only the first, 9 with only the second.
fn pair_table() -> TransactionMatrix {
    let mut rows = Vec::new();
    rows.extend(std::iter::repeat_n(vec![1u8, 1], 36));
    rows.extend(std::iter::repeat_n(vec![1u8, 0], 4));
    rows.extend(std::iter::repeat_n(vec![0u8, 1], 9));
    rows.extend(std::iter::repeat_n(vec![0u8, 0], 21));
    TransactionMatrix::from_binary(&rows).unwrap()
}

#[test]
fn reward_cases() {
    let t = pair_table();
    // conf(0→1) = 36/40 = 0.9, lift = 36·70/(40·45) = 1.4, conf(1→0) = 0.8
    let cfg = MiningConfig::new(0.3, 0.85, 2);
    let mut env = RlarEnv::new(&t, &cfg, 2, RewardWeights::default(), false);
    assert!((env.reward(0b11) - 1.15).abs() < 1e-12);
    let strict = MiningConfig::new(0.3, 0.95, 2);
    let mut env = RlarEnv::new(&t, &strict, 2, RewardWeights::default(), false);
    assert_eq!(env.reward(0b11), 0.0);
    let high = MiningConfig::new(0.6, 0.5, 2);
    let mut env = RlarEnv::new(&t, &high, 2, RewardWeights::default(), false);
    // item 0 has support 40/70, item 1 has 45/70
    assert_eq!(env.reward(0b11), -1.0);
    assert_eq!(env.reward(0b01), -1.0);
    assert_eq!(env.reward(0b10), 0.0);
    // with lift normalised by the best valid lift, both splits share lift 1.4
    let loose = MiningConfig::new(0.3, 0.5, 2);
    let mut env = RlarEnv::new(&t, &loose, 2, RewardWeights { normalize: true, ..Default::default() }, false);
    assert!((env.reward(0b11) - (0.5 * 0.9 + 0.5)).abs() < 1e-12);
}

#[test]
fn state_features() {
    let t = pair_table();
    let cfg = MiningConfig::new(0.3, 0.5, 2);
    let mut env = RlarEnv::new(&t, &cfg, 2, RewardWeights::default(), false);
    assert_eq!(env.features(0), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
    assert_eq!(env.features(0b11), vec![1.0, 1.0, 36.0 / 70.0, 0.9, 1.0]);
    // reaching m_max ends the episode; so does an infrequent add
    assert_eq!(env.step(0b01, 1).2, StepEnd::Terminal);
    let mut env = RlarEnv::new(&t, &MiningConfig::new(0.6, 0.5, 2), 2, RewardWeights::default(), false);
    assert_eq!(env.step(0, 0).2, StepEnd::Terminal);
    assert_eq!(env.step(0, 1).2, StepEnd::Continue);
    let add_only = RlarEnv::new(&t, &cfg, 2, RewardWeights::default(), true);
    assert_eq!(add_only.valid_actions(0b01), vec![1]);
}

#[test]
fn zero_weights_output_biases() {
    let mut net = Mlp::zeros(&[5, 4, 3]).unwrap();
    let mut p = net.parameters();
    let n = p.len();
    p[n - 3..].copy_from_slice(&[0.5, -1.0, 2.0]);
    net.set_parameters(&p).unwrap();
    assert_eq!(net.forward(&[1.0, 2.0, 3.0, 4.0, 5.0]), vec![0.5, -1.0, 2.0]);
}

#[test]
fn single_layer_closed_form() {
    let mut net = Mlp::zeros(&[1, 1]).unwrap();
    let (w, b, x, y) = (0.7, -0.2, 1.5, 0.4);
    net.set_parameters(&[w, b]).unwrap();
    let batch = [Sample { input: vec![x], action: 0, target: y }];
    let (loss, grad) = net.loss_and_gradient(&batch);
    let r: f64 = w * x + b - y;
    assert!((loss - r * r).abs() < 1e-15);
    assert!((grad[0] - 2.0 * r * x).abs() < 1e-15);
    assert!((grad[1] - 2.0 * r).abs() < 1e-15);
    net.sgd_step(&batch, 0.1);
    let p = net.parameters();
    assert!((p[0] - (w - 0.1 * 2.0 * r * x)).abs() < 1e-15);
}

fn max_relative_error(net: &Mlp, batch: &[Sample]) -> f64 {
    let (_, grad) = net.loss_and_gradient(batch);
    let base = net.parameters();
    let h = 1e-5;
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] += h;
        probe.set_parameters(&p).unwrap();
        let up = probe.loss(batch);
        p[i] -= 2.0 * h;
        probe.set_parameters(&p).unwrap();
        let down = probe.loss(batch);
        let numeric = (up - down) / (2.0 * h);
        let scale = grad[i].abs().max(numeric.abs()).max(1e-7);
        worst = worst.max((grad[i] - numeric).abs() / scale);
    }
    worst
}

fn random_batch(rng: &mut ChaCha8Rng, width: usize, outputs: usize, size: usize) -> Vec<Sample> {
    (0..size)
        .map(|_| Sample {
            input: (0..width).map(|_| rng.random_range(-1.0..1.0)).collect(),
            action: rng.random_range(0..outputs),
            target: rng.random_range(-1.0..1.0),
        })
        .collect()
}

#[test]
fn gradient_check_toy() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let net = Mlp::random(&[1, 1, 1, 1, 1], &mut rng).unwrap();
        assert_eq!(net.n_parameters(), 8);
        let batch = random_batch(&mut rng, 1, 1, 4);
        assert!(max_relative_error(&net, &batch) < 1e-4);
    }
}

#[test]
fn gradient_check_after_updates() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut net = Mlp::random(&[13, 16, 16, 16, 10], &mut rng).unwrap();
    let check = random_batch(&mut rng, 13, 10, 8);
    assert!(max_relative_error(&net, &check) < 1e-4);
    for _ in 0..100 {
        let batch = random_batch(&mut rng, 13, 10, 32);
        net.sgd_step(&batch, 1e-2);
    }
    assert!(max_relative_error(&net, &check) < 1e-4);
}

#[test]
fn gradient_check_trained_agent() {
    let t = random_matrix(3, 200, 10, 0.5);
    let cfg = MiningConfig::new(0.1, 0.5, 4);
    let train = TrainConfig { episodes: 40, max_steps: 20, hidden_width: 12, batch_size: 8, ..Default::default() };
    let out = train_dqn(&t, &train, &cfg, 5).unwrap();
    assert!(out.losses.len() >= 100, "only {} updates", out.losses.len());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let batch = random_batch(&mut rng, 13, 10, 8);
    assert!(max_relative_error(&out.network, &batch) < 1e-4);
}

#[test]
fn td_targets() {
    let t = pair_table();
    let cfg = MiningConfig::new(0.3, 0.5, 2);
    let env = RlarEnv::new(&t, &cfg, 2, RewardWeights::default(), false);
    let mut net = Mlp::zeros(&[5, 2]).unwrap();
    let mut p = net.parameters();
    let n = p.len();
    p[n - 2..].copy_from_slice(&[0.3, 0.8]);
    net.set_parameters(&p).unwrap();
    let tr = |terminal| Transition {
        state: vec![0.0; 5],
        action: 0,
        reward: 0.37,
        next_state: vec![1.0, 0.0, 0.6, 0.0, 0.5],
        next_mask: 0b01,
        terminal,
    };
    assert_eq!(td_target(&tr(true), &net, &env, 0.99), 0.37);
    assert!((td_target(&tr(false), &net, &env, 0.5) - (0.37 + 0.5 * 0.8)).abs() < 1e-15);
}

#[test]
fn replay_buffer_capacity() {
    let mut b = ReplayBuffer::new(3).unwrap();
    let mk = |r: f64| Transition { state: vec![], action: 0, reward: r, next_state: vec![], next_mask: 0, terminal: false };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    b.push(mk(0.0));
    assert!(b.sample(2, &mut rng).is_err());
    for r in 1..6 {
        b.push(mk(r as f64));
        assert!(b.len() <= 3);
    }
    assert_eq!(b.iter().map(|t| t.reward).collect::<Vec<_>>(), vec![3.0, 4.0, 5.0]);
    assert_eq!(b.sample(3, &mut rng).unwrap().len(), 3);
}

#[test]
fn no_episodes() {
    let t = random_matrix(1, 50, 5, 0.5);
    let cfg = MiningConfig::new(0.1, 0.5, 3);
    let out = train_dqn(&t, &TrainConfig { episodes: 0, ..Default::default() }, &cfg, 9).unwrap();
    assert!(out.reward_trace.is_empty());
    assert!(out.losses.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    assert_eq!(out.network, Mlp::random(&[8, 128, 128, 128, 5], &mut rng).unwrap());
}

#[test]
fn pure_exploration_regresses_rewards() {
    let t = random_matrix(8, 100, 5, 0.6);
    let cfg = MiningConfig::new(0.2, 0.5, 5);
    let train = TrainConfig {
        episodes: 10_000,
        max_steps: 5,
        gamma: 0.0,
        epsilon_start: 1.0,
        epsilon_min: 1.0,
        hidden_width: 32,
        learning_rate: 1e-2,
        ..Default::default()
    };
    let out = train_dqn(&t, &TrainConfig { episodes: 200, ..train.clone() }, &cfg, 4).unwrap();
    let losses = &out.losses[..500.min(out.losses.len())];
    assert!(losses.len() == 500, "only {} updates", out.losses.len());
    let head: f64 = losses[..50].iter().sum::<f64>() / 50.0;
    let tail: f64 = losses[450..].iter().sum::<f64>() / 50.0;
    assert!(tail < head, "loss {head} -> {tail}");
}

#[test]
fn wide_beam_matches_apriori() {
    for seed in 0..4 {
        let t = random_matrix(20 + seed, 60, 6, 0.6);
        let cfg = MiningConfig::new(0.1, 0.4, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Mlp::random(&[9, 8, 6], &mut rng).unwrap();
        let out = extract_rules(&net, &t, &cfg, 6, 6, 6, false).unwrap();
        let expected = mine_apriori(&t, &cfg).unwrap();
        assert_eq!(out.rules, expected.rules);
        assert_eq!(out.itemsets, expected.itemsets);
    }
}

#[test]
fn greedy_beam_bound() {
    let t = random_matrix(30, 80, 8, 0.6);
    let cfg = MiningConfig::new(0.05, 0.1, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let net = Mlp::random(&[11, 8, 8], &mut rng).unwrap();
    let out = extract_rules(&net, &t, &cfg, 5, 50, 1, false).unwrap();
    let bound: usize = (2..=5).map(|m| (1usize << m) - 2).sum();
    assert!(out.rules.len() <= bound);
    assert!(out.itemsets.len() <= 5);
}

#[test]
fn desk_run_rules_verify() {
    let t = random_matrix(40, 500, 10, 0.5);
    let cfg = MiningConfig::new(0.1, 0.5, 4).with_seed(17);
    let train = TrainConfig { episodes: 50, max_steps: 20, ..Default::default() };
    let out = mine_rlar(&t, &cfg, &train).unwrap();
    assert_eq!(out.training.reward_trace.len(), 50);
    assert!(out.training.reward_trace.iter().all(|r| r.is_finite()));
    assert!(!out.output.rules.is_empty());
    for r in &out.output.rules {
        let c = brute_count(&t, &r.itemset());
        let ca = brute_count(&t, &r.antecedent);
        assert_eq!(r.support, c as f64 / 500.0);
        assert!(r.support >= 0.1 && c as f64 / ca as f64 >= 0.5);
    }
    let again = mine_rlar(&t, &cfg, &train).unwrap();
    assert_eq!(again.training.network, out.training.network);
    assert_eq!(again.training.reward_trace, out.training.reward_trace);
    assert_eq!(again.output, out.output);
}

#[test]
fn network_file_and_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = Mlp::random(&[6, 5, 3], &mut rng).unwrap();
    let mut buf = Vec::new();
    net.write(&mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("mlp 6 5 3\n"));
    assert_eq!(Mlp::read(&buf[..]).unwrap(), net);
    let mut csv = Vec::new();
    write_reward_trace(&mut csv, &[1.5, -2.0]).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap(), "episode,cumulative_reward\n1,1.5\n2,-2\n");
}

#[test]
fn config_validation() {
    assert!(TrainConfig { gamma: 1.0, ..Default::default() }.validate().is_err());
    assert!(TrainConfig { epsilon_min: 0.5, epsilon_start: 0.2, ..Default::default() }.validate().is_err());
    assert!(TrainConfig { top_k: 0, ..Default::default() }.validate().is_err());
    let c = TrainConfig::default();
    assert_eq!(c.epsilon(0), 1.0);
    assert!((c.epsilon(500) - 0.1f64.sqrt()).abs() < 1e-12);
    assert!((c.epsilon(5000) - 0.1).abs() < 1e-12);
}
