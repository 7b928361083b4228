//! Exact frequency-based support, confidence and lift.

use crate::error::{MineError, Result};
use crate::itemset::{split_rule, Itemset};
use crate::rule::Rule;
use crate::transactions::TransactionMatrix;
use std::collections::HashMap;

/// Slack used when comparing a computed fraction with a threshold, so that
/// e.g. 3/10 counts as meeting 0.3.
pub const THRESHOLD_SLACK: f64 = 1e-12;

/// Inclusive threshold test shared by every frequency-based miner.
pub fn meets(value: f64, threshold: f64) -> bool {
    value >= threshold - THRESHOLD_SLACK
}

/// Fraction of transactions containing `itemset`; the empty itemset has support 1.
pub fn support(itemset: &Itemset, data: &TransactionMatrix) -> Result<f64> {
    Ok(data.count(itemset)? as f64 / data.n_transactions() as f64)
}

fn check_pair(a: &Itemset, b: &Itemset) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(MineError::InvalidItemset("antecedent and consequent must be non-empty".into()));
    }
    if !a.is_disjoint(b) {
        return Err(MineError::InvalidItemset(format!("{a} and {b} overlap")));
    }
    Ok(())
}

pub fn confidence(antecedent: &Itemset, consequent: &Itemset, data: &TransactionMatrix) -> Result<f64> {
    check_pair(antecedent, consequent)?;
    let ca = data.count(antecedent)?;
    if ca == 0 {
        return Err(MineError::UndefinedConfidence);
    }
    let cab = data.count(&antecedent.union(consequent))?;
    Ok(ratio(cab, ca))
}

pub fn lift(antecedent: &Itemset, consequent: &Itemset, data: &TransactionMatrix) -> Result<f64> {
    check_pair(antecedent, consequent)?;
    let n = data.n_transactions();
    let ca = data.count(antecedent)?;
    let cb = data.count(consequent)?;
    if ca == 0 || cb == 0 {
        return Err(MineError::UndefinedLift);
    }
    let cab = data.count(&antecedent.union(consequent))?;
    Ok(lift_from_counts(cab, ca, cb, n))
}

fn ratio(num: usize, den: usize) -> f64 {
    num as f64 / den as f64
}

/// Lift from raw counts, c_ab·n / (c_a·c_b), rounded once while the products stay below 2^53.
pub fn lift_from_counts(c_ab: usize, c_a: usize, c_b: usize, n: usize) -> f64 {
    (c_ab as f64 * n as f64) / (c_a as f64 * c_b as f64)
}

/// Memoized support counts over one matrix.
#[derive(Debug)]
pub struct SupportCache<'a> {
    data: &'a TransactionMatrix,
    by_mask: HashMap<u64, usize>,
    by_set: HashMap<Itemset, usize>,
    hits: u64,
    misses: u64,
}

impl<'a> SupportCache<'a> {
    pub fn new(data: &'a TransactionMatrix) -> Self {
        SupportCache { data, by_mask: HashMap::new(), by_set: HashMap::new(), hits: 0, misses: 0 }
    }

    pub fn data(&self) -> &'a TransactionMatrix {
        self.data
    }

    pub fn count(&mut self, itemset: &Itemset) -> usize {
        if self.data.n_items() <= 64 {
            let mask = itemset.mask().expect("index below 64");
            self.count_mask(mask)
        } else if let Some(&c) = self.by_set.get(itemset) {
            self.hits += 1;
            c
        } else {
            self.misses += 1;
            let c = self.data.count_unchecked(itemset);
            self.by_set.insert(itemset.clone(), c);
            c
        }
    }

    /// Requires M ≤ 64.
    pub fn count_mask(&mut self, mask: u64) -> usize {
        if let Some(&c) = self.by_mask.get(&mask) {
            self.hits += 1;
            return c;
        }
        self.misses += 1;
        let c = self.data.count_mask(mask);
        self.by_mask.insert(mask, c);
        c
    }

    pub fn support(&mut self, itemset: &Itemset) -> f64 {
        self.count(itemset) as f64 / self.data.n_transactions() as f64
    }

    pub fn support_mask(&mut self, mask: u64) -> f64 {
        self.count_mask(mask) as f64 / self.data.n_transactions() as f64
    }

    /// (hits, misses) since construction.
    pub fn stats(&self) -> (u64, u64) {
        (self.hits, self.misses)
    }

    /// Every split of `itemset` whose empirical confidence meets `min_confidence`.
    ///
    /// The caller is responsible for checking the itemset's own support.
    pub fn rules_for(&mut self, itemset: &Itemset, min_confidence: f64) -> Vec<Rule> {
        let n = self.data.n_transactions();
        let c_i = self.count(itemset);
        if c_i == 0 || itemset.len() < 2 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (a, b) in split_rule(itemset).expect("size checked") {
            let c_a = self.count(&a);
            let conf = ratio(c_i, c_a);
            if meets(conf, min_confidence) {
                let c_b = self.count(&b);
                out.push(Rule {
                    support: ratio(c_i, n),
                    confidence: conf,
                    lift: lift_from_counts(c_i, c_a, c_b, n),
                    antecedent: a,
                    consequent: b,
                });
            }
        }
        out
    }

    /// Largest empirical confidence over splits meeting `min_confidence`, or `None`.
    pub fn best_confidence(&mut self, itemset: &Itemset, min_confidence: f64) -> Option<f64> {
        self.rules_for(itemset, min_confidence)
            .into_iter()
            .map(|r| r.confidence)
            .fold(None, |acc, c| Some(acc.map_or(c, |a: f64| a.max(c))))
    }
}
