//! Rules, frequent-itemset tables and their CSV renderings.

use crate::error::Result;
use crate::itemset::Itemset;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

/// An association rule `antecedent → consequent` with its metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedent: Itemset,
    pub consequent: Itemset,
    pub support: f64,
    pub confidence: f64,
    pub lift: f64,
}

impl Rule {
    pub fn key(&self) -> (&Itemset, &Itemset) {
        (&self.antecedent, &self.consequent)
    }

    pub fn itemset(&self) -> Itemset {
        self.antecedent.union(&self.consequent)
    }
}

/// Sorts rules by (antecedent, consequent) and drops later duplicates.
pub fn normalize_rules(mut rules: Vec<Rule>) -> Vec<Rule> {
    rules.sort_by(|a, b| a.key().cmp(&b.key()));
    rules.dedup_by(|a, b| a.key() == b.key());
    rules
}

/// Itemsets with their (empirical or estimated) support.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrequentItemsetTable {
    entries: BTreeMap<Itemset, f64>,
}

impl FrequentItemsetTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, itemset: Itemset, support: f64) {
        self.entries.insert(itemset, support);
    }

    pub fn get(&self, itemset: &Itemset) -> Option<f64> {
        self.entries.get(itemset).copied()
    }

    pub fn contains(&self, itemset: &Itemset) -> bool {
        self.entries.contains_key(itemset)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Itemset, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn itemsets(&self) -> impl Iterator<Item = &Itemset> {
        self.entries.keys()
    }

    /// Copy restricted to itemsets with at least `k` items.
    pub fn min_size(&self, k: usize) -> FrequentItemsetTable {
        FrequentItemsetTable {
            entries: self
                .entries
                .iter()
                .filter(|(s, _)| s.len() >= k)
                .map(|(s, v)| (s.clone(), *v))
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W, labels: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["itemset", "size", "support"])?;
        for (s, v) in &self.entries {
            w.write_record([s.label(labels), s.len().to_string(), format!("{v:.4}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Frequent itemsets plus the rules derived from them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MiningOutput {
    pub itemsets: FrequentItemsetTable,
    pub rules: Vec<Rule>,
}

/// Writes `antecedent,consequent,support,confidence,lift` with labels joined by `|`.
pub fn write_rules_csv<W: Write>(writer: W, rules: &[Rule], labels: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["antecedent", "consequent", "support", "confidence", "lift"])?;
    for r in rules {
        w.write_record([
            r.antecedent.label(labels),
            r.consequent.label(labels),
            format!("{:.4}", r.support),
            format!("{:.4}", r.confidence),
            format!("{:.4}", r.lift),
        ])?;
    }
    w.flush()?;
    Ok(())
}
