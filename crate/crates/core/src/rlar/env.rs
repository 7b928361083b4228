//! Itemset-toggling environment and its reward.

use crate::config::MiningConfig;
use crate::itemset::{split_rule, Itemset};
use crate::metrics::{lift_from_counts, meets, SupportCache};
use crate::transactions::TransactionMatrix;

/// How a step ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEnd {
    Continue,
    /// No bootstrapping past this transition.
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    pub confidence: f64,
    pub lift: f64,
    /// Divide lift by the largest lift among the itemset's valid splits.
    pub normalize: bool,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights { confidence: 0.5, lift: 0.5, normalize: false }
    }
}

/// Per-episode environment over a transaction matrix with at most 64 items.
#[derive(Debug)]
pub struct RlarEnv<'a> {
    cache: SupportCache<'a>,
    n: usize,
    m: usize,
    min_support: f64,
    min_confidence: f64,
    m_max: usize,
    weights: RewardWeights,
    add_only: bool,
}

impl<'a> RlarEnv<'a> {
    pub fn new(data: &'a TransactionMatrix, cfg: &MiningConfig, m_max: usize, weights: RewardWeights, add_only: bool) -> Self {
        RlarEnv {
            cache: SupportCache::new(data),
            n: data.n_transactions(),
            m: data.n_items(),
            min_support: cfg.min_support,
            min_confidence: cfg.min_confidence,
            m_max,
            weights,
            add_only,
        }
    }

    pub fn n_items(&self) -> usize {
        self.m
    }

    pub fn state_width(&self) -> usize {
        self.m + 3
    }

    pub fn cache(&mut self) -> &mut SupportCache<'a> {
        &mut self.cache
    }

    pub fn support(&mut self, mask: u64) -> f64 {
        self.cache.support_mask(mask)
    }

    pub fn is_frequent(&mut self, mask: u64) -> bool {
        let s = self.support(mask);
        meets(s, self.min_support)
    }

    /// Largest empirical confidence over splits into two non-empty parts; 0 below size 2.
    pub fn max_confidence(&mut self, mask: u64) -> f64 {
        if mask.count_ones() < 2 {
            return 0.0;
        }
        let c = self.cache.count_mask(mask);
        if c == 0 {
            return 0.0;
        }
        let itemset = Itemset::from_mask(mask);
        let mut best: f64 = 0.0;
        for (a, _) in split_rule(&itemset).expect("size checked") {
            let ca = self.cache.count_mask(a.mask().expect("below 64"));
            best = best.max(c as f64 / ca as f64);
        }
        best
    }

    /// Bits, support, max confidence, size / M.
    pub fn features(&mut self, mask: u64) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.m).map(|i| ((mask >> i) & 1) as f64).collect();
        v.push(self.support(mask));
        v.push(self.max_confidence(mask));
        v.push(mask.count_ones() as f64 / self.m as f64);
        v
    }

    /// −1 when infrequent, else the best weighted confidence/lift score over
    /// splits meeting the confidence threshold, else 0.
    pub fn reward(&mut self, mask: u64) -> f64 {
        let c = self.cache.count_mask(mask);
        if !meets(c as f64 / self.n as f64, self.min_support) {
            return -1.0;
        }
        if mask.count_ones() < 2 {
            return 0.0;
        }
        let itemset = Itemset::from_mask(mask);
        let mut valid = Vec::new();
        for (a, b) in split_rule(&itemset).expect("size checked") {
            let ca = self.cache.count_mask(a.mask().expect("below 64"));
            let conf = c as f64 / ca as f64;
            if meets(conf, self.min_confidence) {
                let cb = self.cache.count_mask(b.mask().expect("below 64"));
                valid.push((conf, lift_from_counts(c, ca, cb, self.n)));
            }
        }
        if valid.is_empty() {
            return 0.0;
        }
        let lift_scale = if self.weights.normalize {
            valid.iter().map(|v| v.1).fold(0.0, f64::max)
        } else {
            1.0
        };
        valid
            .iter()
            .map(|&(conf, lift)| self.weights.confidence * conf + self.weights.lift * lift / lift_scale)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether toggling `item` is allowed from `mask`.
    pub fn is_valid(&self, mask: u64, item: usize) -> bool {
        let present = (mask >> item) & 1 == 1;
        if present {
            !self.add_only
        } else {
            (mask.count_ones() as usize) < self.m_max
        }
    }

    pub fn valid_actions(&self, mask: u64) -> Vec<usize> {
        (0..self.m).filter(|&i| self.is_valid(mask, i)).collect()
    }

    /// Toggles `item` and returns (next mask, reward, end).
    pub fn step(&mut self, mask: u64, item: usize) -> (u64, f64, StepEnd) {
        let added = (mask >> item) & 1 == 0;
        let next = mask ^ (1u64 << item);
        let reward = self.reward(next);
        let end = if next.count_ones() as usize >= self.m_max || (added && !self.is_frequent(next)) {
            StepEnd::Terminal
        } else {
            StepEnd::Continue
        };
        (next, reward, end)
    }
}
