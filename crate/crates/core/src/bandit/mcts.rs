use crate::config::MiningConfig;
use crate::error::{MineError, Result};
use crate::itemset::Itemset;
use crate::metrics::{meets, SupportCache};
use crate::rule::{normalize_rules, FrequentItemsetTable, MiningOutput, Rule};
use crate::transactions::TransactionMatrix;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Rollout reward.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Highest confidence among splits meeting min_confidence.
    #[default]
    MaxConfidence,
    /// Support of the completed itemset.
    Support,
    /// Number of splits meeting min_confidence.
    RuleCount,
    /// Highest support·confidence among splits meeting min_confidence.
    SupportTimesConfidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MctsConfig {
    pub iterations: usize,
    pub m_max: usize,
    pub exploration: f64,
    pub reward: RewardMode,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig { iterations: 1000, m_max: 3, exploration: std::f64::consts::SQRT_2, reward: RewardMode::MaxConfidence }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MctsNode {
    pub itemset: Itemset,
    pub visits: usize,
    pub total_reward: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl MctsNode {
    pub fn average_reward(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.total_reward / self.visits as f64
        }
    }
}

/// Search tree rooted at the empty itemset; node 0 is the root.
pub struct MctsTree<'a> {
    nodes: Vec<MctsNode>,
    cache: SupportCache<'a>,
    cfg: MiningConfig,
    mcts: MctsConfig,
    rng: ChaCha8Rng,
    t: usize,
}

impl<'a> MctsTree<'a> {
    pub fn new(data: &'a TransactionMatrix, cfg: &MiningConfig, mcts: &MctsConfig) -> Result<Self> {
        cfg.validate(data.n_items())?;
        if !(mcts.exploration > 0.0) {
            return Err(MineError::InvalidConfig(format!("exploration constant must be positive, got {}", mcts.exploration)));
        }
        if mcts.m_max < 1 || mcts.m_max > data.n_items() {
            return Err(MineError::InvalidConfig(format!("m_max must lie in [1, {}], got {}", data.n_items(), mcts.m_max)));
        }
        Ok(MctsTree {
            nodes: vec![MctsNode { itemset: Itemset::empty(), visits: 0, total_reward: 0.0, parent: None, children: Vec::new() }],
            cache: SupportCache::new(data),
            cfg: cfg.clone(),
            mcts: mcts.clone(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            t: 0,
        })
    }

    pub fn nodes(&self) -> &[MctsNode] {
        &self.nodes
    }

    pub fn root(&self) -> &MctsNode {
        &self.nodes[0]
    }

    fn frequent(&mut self, s: &Itemset) -> bool {
        let p = self.cache.support(s);
        meets(p, self.cfg.min_support)
    }

    fn select(&self) -> usize {
        let mut node = 0;
        while !self.nodes[node].children.is_empty() {
            let children = &self.nodes[node].children;
            if let Some(&c) = children.iter().find(|&&c| self.nodes[c].visits == 0) {
                return c;
            }
            let ln_t = (self.t as f64).ln();
            let mut best = children[0];
            let mut best_score = f64::NEG_INFINITY;
            for &c in children {
                let ch = &self.nodes[c];
                let score = ch.average_reward() + self.mcts.exploration * (ln_t / ch.visits as f64).sqrt();
                if score > best_score {
                    best_score = score;
                    best = c;
                }
            }
            node = best;
        }
        node
    }

    fn frequent_extensions(&mut self, node: usize) -> Vec<Itemset> {
        let base = self.nodes[node].itemset.clone();
        if base.len() >= self.mcts.m_max {
            return Vec::new();
        }
        let m = self.cache.data().n_items();
        (0..m)
            .filter(|&i| !base.contains(i))
            .map(|i| base.with(i))
            .filter(|s| self.frequent(s))
            .collect()
    }

    fn fully_expanded(&mut self, node: usize) -> bool {
        let ext = self.frequent_extensions(node);
        ext.iter().all(|s| self.nodes[node].children.iter().any(|&c| self.nodes[c].itemset == *s))
    }

    fn expand(&mut self, node: usize) {
        for s in self.frequent_extensions(node) {
            if self.nodes[node].children.iter().any(|&c| self.nodes[c].itemset == s) {
                continue;
            }
            let id = self.nodes.len();
            self.nodes.push(MctsNode { itemset: s, visits: 0, total_reward: 0.0, parent: Some(node), children: Vec::new() });
            self.nodes[node].children.push(id);
        }
    }

    /// Random completion up to m_max; 0 as soon as support falls below the threshold.
    pub fn simulate(&mut self, start: &Itemset) -> f64 {
        let m = self.cache.data().n_items();
        let mut cur = start.clone();
        while cur.len() < self.mcts.m_max {
            let free: Vec<usize> = (0..m).filter(|&i| !cur.contains(i)).collect();
            let Some(&i) = free.choose(&mut self.rng) else { break };
            cur = cur.with(i);
            if !self.frequent(&cur) {
                return 0.0;
            }
        }
        if !self.frequent(&cur) {
            return 0.0;
        }
        let rules = self.cache.rules_for(&cur, self.cfg.min_confidence);
        match self.mcts.reward {
            RewardMode::Support => self.cache.support(&cur),
            RewardMode::RuleCount => rules.len() as f64,
            RewardMode::MaxConfidence => rules.iter().map(|r| r.confidence).fold(0.0, f64::max),
            RewardMode::SupportTimesConfidence => rules.iter().map(|r| r.support * r.confidence).fold(0.0, f64::max),
        }
    }

    fn backpropagate(&mut self, mut node: usize, reward: f64) {
        loop {
            let nd = &mut self.nodes[node];
            nd.visits += 1;
            nd.total_reward += reward;
            match nd.parent {
                Some(p) => node = p,
                None => break,
            }
        }
    }

    /// One select/expand/simulate/backpropagate round; returns the simulated node and its reward.
    pub fn iterate(&mut self) -> (usize, f64) {
        self.t += 1;
        let node = self.select();
        let leaf = if self.fully_expanded(node) {
            node
        } else {
            self.expand(node);
            let fresh: Vec<usize> =
                self.nodes[node].children.iter().copied().filter(|&c| self.nodes[c].visits == 0).collect();
            *fresh.choose(&mut self.rng).expect("expansion adds an unvisited child")
        };
        let start = self.nodes[leaf].itemset.clone();
        let reward = self.simulate(&start);
        self.backpropagate(leaf, reward);
        (leaf, reward)
    }

    /// Depth-first walk over visited nodes collecting frequent itemsets and rules.
    pub fn extract(&mut self) -> MiningOutput {
        let mut table = FrequentItemsetTable::new();
        let mut rules: BTreeMap<(Itemset, Itemset), Rule> = BTreeMap::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            stack.extend(node.children.iter().rev().copied());
            if node.visits == 0 || node.itemset.is_empty() {
                continue;
            }
            let s = node.itemset.clone();
            let p = self.cache.support(&s);
            if !meets(p, self.cfg.min_support) {
                continue;
            }
            table.insert(s.clone(), p);
            for r in self.cache.rules_for(&s, self.cfg.min_confidence) {
                rules.insert((r.antecedent.clone(), r.consequent.clone()), r);
            }
        }
        MiningOutput { itemsets: table, rules: normalize_rules(rules.into_values().collect()) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MctsOutput {
    pub output: MiningOutput,
    pub nodes: usize,
    pub iterations: usize,
}

/// Runs `mcts.iterations` rounds from the empty itemset and extracts rules from visited nodes.
pub fn mine_mcts(data: &TransactionMatrix, cfg: &MiningConfig, mcts: &MctsConfig) -> Result<MctsOutput> {
    let mut tree = MctsTree::new(data, cfg, mcts)?;
    for _ in 0..mcts.iterations {
        tree.iterate();
    }
    let output = tree.extract();
    Ok(MctsOutput { output, nodes: tree.nodes.len(), iterations: mcts.iterations })
}
