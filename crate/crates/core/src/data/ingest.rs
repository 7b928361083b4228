use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MineError, Result};
use crate::features::FeatureMatrix;
use crate::transactions::TransactionMatrix;

/// Keep only rows whose `column` holds one of `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFilter {
    pub column: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CategoricalSchema {
    /// Each distinct value of these columns becomes one item labelled `column=value`.
    pub item_columns: Vec<String>,
    /// Numeric columns averaged into per-item feature vectors.
    pub feature_columns: Vec<String>,
    pub filters: Vec<RowFilter>,
}

impl CategoricalSchema {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub transactions: TransactionMatrix,
    /// Absent when the schema lists no feature columns.
    pub features: Option<FeatureMatrix>,
    /// Zero-based indices of kept rows in the input file.
    pub source_rows: Vec<usize>,
    pub dropped_missing: usize,
    pub dropped_filtered: usize,
    pub warnings: Vec<String>,
}

fn same_value(cell: &str, wanted: &str) -> bool {
    if cell == wanted {
        return true;
    }
    match (cell.parse::<f64>(), wanted.parse::<f64>()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

pub fn ingest_categorical<R: Read>(reader: R, schema: &CategoricalSchema) -> Result<Ingested> {
    if schema.item_columns.is_empty() {
        return Err(MineError::InvalidConfig("schema lists no item columns".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MineError::InvalidConfig(format!("column {name:?} not found in header")))
    };
    let item_cols = schema.item_columns.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;
    let feature_cols = schema.feature_columns.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;
    let filters = schema.filters.iter().map(|f| Ok((find(&f.column)?, &f.values))).collect::<Result<Vec<_>>>()?;

    let mut kept: Vec<(usize, Vec<String>, Vec<f64>)> = Vec::new();
    let mut dropped_missing = 0;
    let mut dropped_filtered = 0;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let cell = |i: usize| rec.get(i).unwrap_or("");
        if !filters.iter().all(|(i, vals)| vals.iter().any(|v| same_value(cell(*i), v))) {
            dropped_filtered += 1;
            continue;
        }
        if item_cols.iter().chain(&feature_cols).any(|&i| cell(i).is_empty()) {
            dropped_missing += 1;
            continue;
        }
        let values = item_cols.iter().map(|&i| cell(i).to_string()).collect();
        let feats = feature_cols
            .iter()
            .zip(&schema.feature_columns)
            .map(|(&i, name)| {
                cell(i).parse::<f64>().map_err(|e| MineError::Parse {
                    row: row + 1,
                    column: name.clone(),
                    message: format!("{:?}: {e}", cell(i)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        kept.push((row, values, feats));
    }
    if kept.is_empty() {
        return Err(MineError::InvalidData("no rows left after filtering".into()));
    }

    // items ordered by schema column, then by value
    let mut vocab: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); item_cols.len()];
    for (_, values, _) in &kept {
        for (c, v) in values.iter().enumerate() {
            vocab[c].insert(v);
        }
    }
    let mut index: Vec<BTreeMap<&str, usize>> = Vec::new();
    let mut labels = Vec::new();
    for (c, vals) in vocab.iter().enumerate() {
        let mut map = BTreeMap::new();
        for v in vals {
            map.insert(*v, labels.len());
            labels.push(format!("{}={}", schema.item_columns[c], v));
        }
        index.push(map);
    }
    let m = labels.len();
    let d = feature_cols.len();
    let mut rows = Vec::with_capacity(kept.len());
    let mut sums = vec![vec![0.0; d]; m];
    let mut counts = vec![0usize; m];
    for (_, values, feats) in &kept {
        let mut row = vec![false; m];
        for (c, v) in values.iter().enumerate() {
            let j = index[c][v.as_str()];
            row[j] = true;
            counts[j] += 1;
            for (s, f) in sums[j].iter_mut().zip(feats) {
                *s += f;
            }
        }
        rows.push(row);
    }
    let means: Vec<Vec<f64>> = sums.into_iter().zip(&counts).map(|(s, &c)| s.into_iter().map(|v| v / c as f64).collect()).collect();
    let mut warnings = Vec::new();
    if dropped_missing > 0 {
        warnings.push(format!("dropped {dropped_missing} rows with missing values"));
    }
    let features = if d == 0 { None } else { Some(FeatureMatrix::new(means)?.with_labels(labels.clone())?) };
    Ok(Ingested {
        transactions: TransactionMatrix::from_rows_with_labels(&rows, labels)?,
        features,
        source_rows: kept.iter().map(|k| k.0).collect(),
        dropped_missing,
        dropped_filtered,
        warnings,
    })
}

pub fn ingest_categorical_path(path: &Path, schema: &CategoricalSchema) -> Result<Ingested> {
    ingest_categorical(std::fs::File::open(path)?, schema)
}
