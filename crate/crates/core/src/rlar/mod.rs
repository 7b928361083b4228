//! Deep Q-learning miner: an agent toggles items in an itemset, is rewarded for
//! frequent itemsets with confident, high-lift rules, and a beam walk over the
//! learned Q-values extracts the final rules.

mod env;
mod mlp;
mod replay;

use std::collections::HashSet;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::MiningConfig;
use crate::error::{MineError, Result};
use crate::itemset::Itemset;
use crate::rule::{normalize_rules, FrequentItemsetTable, MiningOutput};
use crate::transactions::TransactionMatrix;

pub use env::{RewardWeights, RlarEnv, StepEnd};
pub use mlp::{Gradient, Mlp, Sample};
pub use replay::{ReplayBuffer, Transition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub episodes: usize,
    pub max_steps: usize,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    /// Steps over which ε decays exponentially from start to min.
    pub epsilon_decay_steps: usize,
    /// Copy the online network into the target network every this many steps.
    pub target_update: usize,
    /// Overrides the mining config's maximum itemset size.
    pub m_max: Option<usize>,
    pub weight_confidence: f64,
    pub weight_lift: f64,
    pub normalize_reward: bool,
    pub top_k: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub learning_rate: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub add_only: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 1000,
            max_steps: 50,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_min: 0.1,
            epsilon_decay_steps: 1000,
            target_update: 1000,
            m_max: None,
            weight_confidence: 0.5,
            weight_lift: 0.5,
            normalize_reward: false,
            top_k: 3,
            hidden_width: 128,
            hidden_layers: 3,
            learning_rate: 1e-3,
            buffer_capacity: 10_000,
            batch_size: 32,
            add_only: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MineError::InvalidConfig(m.to_string()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon_min) || !(0.0..=1.0).contains(&self.epsilon_start) {
            return bad("epsilon values must lie in [0, 1]");
        }
        if self.epsilon_min > self.epsilon_start {
            return bad("epsilon_min exceeds epsilon_start");
        }
        if self.top_k == 0 {
            return bad("top_k must be at least 1");
        }
        if self.hidden_width == 0 || self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return bad("hidden width and batch size must be positive and fit in the buffer");
        }
        if self.target_update == 0 || self.epsilon_decay_steps == 0 {
            return bad("target_update and epsilon_decay_steps must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        Ok(())
    }

    /// ε after `step` environment steps.
    pub fn epsilon(&self, step: usize) -> f64 {
        if self.epsilon_start <= self.epsilon_min || self.epsilon_min == 0.0 {
            return if step >= self.epsilon_decay_steps { self.epsilon_min } else { self.epsilon_start };
        }
        let ratio = self.epsilon_min / self.epsilon_start;
        (self.epsilon_start * ratio.powf(step as f64 / self.epsilon_decay_steps as f64)).max(self.epsilon_min)
    }

    fn m_max(&self, cfg: &MiningConfig) -> usize {
        self.m_max.unwrap_or(cfg.max_itemset_size)
    }

    fn weights(&self) -> RewardWeights {
        RewardWeights { confidence: self.weight_confidence, lift: self.weight_lift, normalize: self.normalize_reward }
    }

    pub fn layer_sizes(&self, m: usize) -> Vec<usize> {
        let mut s = vec![m + 3];
        s.extend(std::iter::repeat_n(self.hidden_width, self.hidden_layers));
        s.push(m);
        s
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub network: Mlp,
    /// Sum of rewards per episode.
    pub reward_trace: Vec<f64>,
    /// Minibatch loss of every gradient step.
    pub losses: Vec<f64>,
    pub steps: usize,
}

fn check_items(data: &TransactionMatrix, m_max: usize) -> Result<()> {
    let m = data.n_items();
    if m > 64 {
        return Err(MineError::TooLarge { what: "item count for the reinforcement miner", limit: 64, got: m });
    }
    if m_max == 0 || m_max > m {
        return Err(MineError::InvalidConfig(format!("m_max must lie in [1, {m}], got {m_max}")));
    }
    Ok(())
}

fn masked_argmax(q: &[f64], env: &RlarEnv<'_>, mask: u64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in q.iter().enumerate() {
        if env.is_valid(mask, i) && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|b| b.0)
}

/// TD target for one stored transition.
pub fn td_target(t: &Transition, target_net: &Mlp, env: &RlarEnv<'_>, gamma: f64) -> f64 {
    if t.terminal {
        return t.reward;
    }
    let q = target_net.forward(&t.next_state);
    match masked_argmax(&q, env, t.next_mask) {
        Some(a) => t.reward + gamma * q[a],
        None => t.reward,
    }
}

/// Runs ε-greedy DQN training from the empty itemset for every episode.
pub fn train_dqn(data: &TransactionMatrix, train: &TrainConfig, cfg: &MiningConfig, seed: u64) -> Result<TrainOutput> {
    train.validate()?;
    let m_max = train.m_max(cfg);
    check_items(data, m_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut env = RlarEnv::new(data, cfg, m_max, train.weights(), train.add_only);
    let mut net = Mlp::random(&train.layer_sizes(data.n_items()), &mut rng)?;
    let mut target = net.clone();
    let mut buffer = ReplayBuffer::new(train.buffer_capacity)?;
    let mut trace = Vec::with_capacity(train.episodes);
    let mut losses = Vec::new();
    let mut total_steps = 0usize;

    for episode in 0..train.episodes {
        let mut mask = 0u64;
        let mut state = env.features(mask);
        let mut episode_reward = 0.0;
        for step in 0..train.max_steps {
            let valid = env.valid_actions(mask);
            if valid.is_empty() {
                break;
            }
            let action = if rng.random::<f64>() < train.epsilon(total_steps) {
                valid[rng.random_range(0..valid.len())]
            } else {
                masked_argmax(&net.forward(&state), &env, mask).expect("valid action exists")
            };
            let (next, reward, end) = env.step(mask, action);
            let next_state = env.features(next);
            episode_reward += reward;
            buffer.push(Transition {
                state: std::mem::take(&mut state),
                action,
                reward,
                next_state: next_state.clone(),
                next_mask: next,
                terminal: end == StepEnd::Terminal,
            });
            total_steps += 1;

            if buffer.len() >= train.batch_size {
                let batch: Vec<Sample> = buffer
                    .sample(train.batch_size, &mut rng)?
                    .into_iter()
                    .map(|t| Sample { input: t.state.clone(), action: t.action, target: td_target(t, &target, &env, train.gamma) })
                    .collect();
                let loss = net.sgd_step(&batch, train.learning_rate);
                if !loss.is_finite() || net.parameters().iter().any(|p| !p.is_finite()) {
                    return Err(MineError::Diverged {
                        episode,
                        step,
                        message: format!("minibatch loss {loss} after {} updates", losses.len()),
                    });
                }
                losses.push(loss);
            }
            if total_steps % train.target_update == 0 {
                target = net.clone();
            }
            mask = next;
            state = next_state;
            if end == StepEnd::Terminal {
                break;
            }
        }
        trace.push(episode_reward);
    }
    Ok(TrainOutput { network: net, reward_trace: trace, losses, steps: total_steps })
}

/// Beam walk from the empty itemset following the `k` highest-valued actions of every state.
///
/// Itemsets already reached are not expanded twice. Every emitted rule is checked
/// against exact counts.
pub fn extract_rules(
    net: &Mlp,
    data: &TransactionMatrix,
    cfg: &MiningConfig,
    m_max: usize,
    max_steps: usize,
    k: usize,
    add_only: bool,
) -> Result<MiningOutput> {
    check_items(data, m_max)?;
    if k == 0 {
        return Err(MineError::InvalidConfig("top_k must be at least 1".into()));
    }
    if net.n_inputs() != data.n_items() + 3 || net.n_outputs() != data.n_items() {
        return Err(MineError::InvalidConfig(format!(
            "network shape {:?} does not fit {} items",
            net.sizes(),
            data.n_items()
        )));
    }
    let mut env = RlarEnv::new(data, cfg, m_max, RewardWeights::default(), add_only);
    let mut seen: HashSet<u64> = HashSet::from([0]);
    let mut beam = vec![0u64];
    let mut itemsets = FrequentItemsetTable::new();
    let mut rules = Vec::new();
    let mut step = 0;
    while step < max_steps && !beam.is_empty() {
        let mut next_beam = Vec::new();
        for &mask in &beam {
            let q = net.forward(&env.features(mask));
            let mut actions: Vec<usize> = (0..q.len()).filter(|&i| env.is_valid(mask, i)).collect();
            actions.sort_by(|&a, &b| q[b].total_cmp(&q[a]).then(a.cmp(&b)));
            actions.truncate(k);
            for a in actions {
                let next = mask ^ (1u64 << a);
                if next == 0 || next.count_ones() as usize > m_max || !seen.insert(next) {
                    continue;
                }
                if !env.is_frequent(next) {
                    continue;
                }
                let itemset = Itemset::from_mask(next);
                itemsets.insert(itemset.clone(), env.support(next));
                rules.extend(env.cache().rules_for(&itemset, cfg.min_confidence));
                next_beam.push(next);
            }
        }
        beam = next_beam;
        step += 1;
    }
    Ok(MiningOutput { itemsets, rules: normalize_rules(rules) })
}

#[derive(Debug, Clone)]
pub struct RlarOutput {
    pub output: MiningOutput,
    pub training: TrainOutput,
}

/// Trains with `cfg.seed` and extracts rules with the trained network.
pub fn mine_rlar(data: &TransactionMatrix, cfg: &MiningConfig, train: &TrainConfig) -> Result<RlarOutput> {
    cfg.validate(data.n_items())?;
    let training = train_dqn(data, train, cfg, cfg.seed)?;
    let output = extract_rules(&training.network, data, cfg, train.m_max(cfg), train.max_steps, train.top_k, train.add_only)?;
    Ok(RlarOutput { output, training })
}

/// CSV with columns `episode,cumulative_reward`, episodes numbered from 1.
pub fn write_reward_trace<W: Write>(writer: W, trace: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["episode", "cumulative_reward"])?;
    for (i, r) in trace.iter().enumerate() {
        w.write_record([(i + 1).to_string(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
