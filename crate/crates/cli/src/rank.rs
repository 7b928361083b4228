//! Ranked rule tables with supporting transaction examples.

use std::io::{Read, Write};

use armine::{Itemset, MineError, Rule, TransactionMatrix};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankKey {
    Support,
    Confidence,
    Lift,
}

impl RankKey {
    fn of(self, r: &Rule) -> f64 {
        match self {
            RankKey::Support => r.support,
            RankKey::Confidence => r.confidence,
            RankKey::Lift => r.lift,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedRule {
    pub rule: Rule,
    /// Transactions containing antecedent and consequent together.
    pub support_count: usize,
    /// Up to three such transactions, lowest index first.
    pub examples: Vec<usize>,
}

/// Descending by `key`, ties by (antecedent, consequent), truncated to `k`.
pub fn rank_rules(rules: &[Rule], data: &TransactionMatrix, key: RankKey, k: usize) -> Result<Vec<RankedRule>, CliError> {
    if k == 0 {
        return Err(CliError::Usage("k must be at least 1".into()));
    }
    let mut sorted: Vec<&Rule> = rules.iter().collect();
    sorted.sort_by(|a, b| key.of(b).total_cmp(&key.of(a)).then_with(|| a.key().cmp(&b.key())));
    sorted
        .into_iter()
        .take(k)
        .map(|r| {
            let rows = data.covering_rows(&r.itemset())?;
            Ok(RankedRule { rule: r.clone(), support_count: rows.len(), examples: rows.into_iter().take(3).collect() })
        })
        .collect()
}

fn parse_side(text: &str, labels: &[String], row: usize) -> Result<Itemset, CliError> {
    let items = text
        .split('|')
        .map(|l| {
            labels.iter().position(|x| x == l).ok_or_else(|| {
                CliError::Mine(MineError::Parse { row, column: "rule".into(), message: format!("unknown item {l:?}") })
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Itemset::from_items(items))
}

/// Reads the rules CSV written by `mine`, resolving labels against `labels`.
pub fn read_rules_csv<R: Read>(reader: R, labels: &[String]) -> Result<Vec<Rule>, CliError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() != 5 {
            return Err(CliError::Mine(MineError::Parse { row, column: String::new(), message: format!("{} cells, expected 5", rec.len()) }));
        }
        let num = |j: usize, name: &str| {
            rec[j].parse::<f64>().map_err(|e| CliError::Mine(MineError::Parse { row, column: name.into(), message: e.to_string() }))
        };
        out.push(Rule {
            antecedent: parse_side(&rec[0], labels, row)?,
            consequent: parse_side(&rec[1], labels, row)?,
            support: num(2, "support")?,
            confidence: num(3, "confidence")?,
            lift: num(4, "lift")?,
        });
    }
    Ok(out)
}

pub fn write_ranked_csv<W: Write>(writer: W, ranked: &[RankedRule], labels: &[String]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rank", "antecedent", "consequent", "support", "confidence", "lift", "support_count", "example_indices"])?;
    for (i, r) in ranked.iter().enumerate() {
        let ex: Vec<String> = r.examples.iter().map(|e| e.to_string()).collect();
        w.write_record([
            (i + 1).to_string(),
            r.rule.antecedent.label(labels),
            r.rule.consequent.label(labels),
            format!("{:.4}", r.rule.support),
            format!("{:.4}", r.rule.confidence),
            format!("{:.4}", r.rule.lift),
            r.support_count.to_string(),
            ex.join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}
