//! Per-item feature vectors (one row per item).

use crate::error::{MineError, Result};
use std::io::{Read, Write};
use std::path::Path;

/// M rows of d-dimensional item features, with optional labels.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.is_empty() || d == 0 {
            return Err(MineError::InvalidData("feature matrix needs at least one row and column".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(MineError::InvalidData(format!("feature row {i} has {} columns, expected {d}", r.len())));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(MineError::InvalidData(format!("feature row {i} has a non-finite value")));
            }
        }
        Ok(FeatureMatrix { rows, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.rows.len() {
            return Err(MineError::InvalidData(format!("{} labels for {} feature rows", labels.len(), self.rows.len())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n_items(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Appends one item row.
    pub fn push(&mut self, row: Vec<f64>, label: Option<String>) -> Result<()> {
        if row.len() != self.dim() {
            return Err(MineError::InvalidData(format!("new row has {} columns, expected {}", row.len(), self.dim())));
        }
        self.rows.push(row);
        if let Some(l) = self.labels.as_mut() {
            l.push(label.unwrap_or_else(|| format!("item_{}", l.len())));
        }
        Ok(())
    }

    /// Stable 64-bit FNV-1a digest of the values, used to tag derived matrices.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for r in &self.rows {
            for v in r {
                for b in v.to_bits().to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        h
    }

    /// Reads a header row then one numeric row per item. A first column named
    /// `label` holds item names.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let has_label = header.first().is_some_and(|h| h.eq_ignore_ascii_case("label"));
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = Vec::new();
            for (j, cell) in rec.iter().enumerate() {
                if has_label && j == 0 {
                    labels.push(cell.trim().to_string());
                    continue;
                }
                let v: f64 = cell.trim().parse().map_err(|_| MineError::Parse {
                    row: r + 1,
                    column: header.get(j).cloned().unwrap_or_default(),
                    message: format!("not a number: {cell:?}"),
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        let fm = FeatureMatrix::new(rows)?;
        if has_label {
            fm.with_labels(labels)
        } else {
            Ok(fm)
        }
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = Vec::new();
        if self.labels.is_some() {
            header.push("label".to_string());
        }
        header.extend((0..self.dim()).map(|k| format!("f{k}")));
        w.write_record(&header)?;
        for (i, r) in self.rows.iter().enumerate() {
            let mut rec = Vec::new();
            if let Some(l) = &self.labels {
                rec.push(l[i].clone());
            }
            rec.extend(r.iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
