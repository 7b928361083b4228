//! Exact frequency-based miners: Apriori, FP-Growth and Eclat.

mod apriori;
mod eclat;
mod fpgrowth;

pub use apriori::mine_apriori;
pub use eclat::{mine_eclat, TidsetIndex};
pub use fpgrowth::{mine_fpgrowth, FpTree};

use crate::config::MiningConfig;
use crate::itemset::{split_rule, Itemset};
use crate::metrics::{lift_from_counts, meets};
use crate::rule::{normalize_rules, FrequentItemsetTable, MiningOutput, Rule};
use std::collections::BTreeMap;

pub(crate) fn is_frequent(count: usize, n: usize, cfg: &MiningConfig) -> bool {
    meets(count as f64 / n as f64, cfg.min_support)
}

/// Converts exact counts of a downward-closed family into a table and rule list.
pub(crate) fn finish(counts: &BTreeMap<Itemset, usize>, n: usize, cfg: &MiningConfig) -> MiningOutput {
    let mut itemsets = FrequentItemsetTable::new();
    let mut rules = Vec::new();
    for (s, &c) in counts {
        itemsets.insert(s.clone(), c as f64 / n as f64);
        if s.len() < 2 {
            continue;
        }
        for (a, b) in split_rule(s).expect("size >= 2") {
            let ca = counts[&a];
            let conf = c as f64 / ca as f64;
            if meets(conf, cfg.min_confidence) {
                let cb = counts[&b];
                rules.push(Rule {
                    support: c as f64 / n as f64,
                    confidence: conf,
                    lift: lift_from_counts(c, ca, cb, n),
                    antecedent: a,
                    consequent: b,
                });
            }
        }
    }
    MiningOutput { itemsets, rules: normalize_rules(rules) }
}
