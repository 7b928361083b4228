//! Binary transaction matrices with a packed bit layout.

use crate::error::{MineError, Result};
use crate::itemset::Itemset;
use std::io::{Read, Write};
use std::path::Path;

/// N transactions over M items, stored as packed 64-bit words per row.
#[derive(Clone, Debug, PartialEq)]
pub struct TransactionMatrix {
    n: usize,
    m: usize,
    words_per_row: usize,
    words: Vec<u64>,
    labels: Vec<String>,
}

impl TransactionMatrix {
    /// Builds from boolean rows; labels default to `item_<j>`.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let m = rows.first().map(|r| r.len()).unwrap_or(0);
        let labels = (0..m).map(|j| format!("item_{j}")).collect();
        Self::from_rows_with_labels(rows, labels)
    }

    pub fn from_rows_with_labels(rows: &[Vec<bool>], labels: Vec<String>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(MineError::InvalidData("matrix needs at least one transaction".into()));
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(MineError::InvalidData("matrix needs at least one item".into()));
        }
        if labels.len() != m {
            return Err(MineError::InvalidData(format!(
                "{} labels for {m} items",
                labels.len()
            )));
        }
        let wpr = m.div_ceil(64);
        let mut words = vec![0u64; n * wpr];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(MineError::InvalidData(format!(
                    "row {r} has {} cells, expected {m}",
                    row.len()
                )));
            }
            for (j, &b) in row.iter().enumerate() {
                if b {
                    words[r * wpr + j / 64] |= 1 << (j % 64);
                }
            }
        }
        Ok(TransactionMatrix { n, m, words_per_row: wpr, words, labels })
    }

    /// Builds from 0/1 integer rows.
    pub fn from_binary(rows: &[Vec<u8>]) -> Result<Self> {
        let mut b = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => out.push(false),
                    1 => out.push(true),
                    _ => {
                        return Err(MineError::InvalidData(format!(
                            "cell ({r},{j}) is {v}, expected 0 or 1"
                        )))
                    }
                }
            }
            b.push(out);
        }
        Self::from_rows(&b)
    }

    pub fn n_transactions(&self) -> usize {
        self.n
    }

    pub fn n_items(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn set_labels(&mut self, labels: Vec<String>) -> Result<()> {
        if labels.len() != self.m {
            return Err(MineError::InvalidData(format!(
                "{} labels for {} items",
                labels.len(),
                self.m
            )));
        }
        self.labels = labels;
        Ok(())
    }

    pub fn get(&self, row: usize, item: usize) -> bool {
        self.words[row * self.words_per_row + item / 64] >> (item % 64) & 1 == 1
    }

    pub fn row(&self, row: usize) -> Vec<bool> {
        (0..self.m).map(|j| self.get(row, j)).collect()
    }

    /// Row as a 64-bit mask; only meaningful when M ≤ 64.
    pub fn row_mask(&self, row: usize) -> u64 {
        self.words[row * self.words_per_row]
    }

    pub fn row_itemset(&self, row: usize) -> Itemset {
        Itemset::from_items((0..self.m).filter(|&j| self.get(row, j)))
    }

    fn pattern(&self, itemset: &Itemset) -> Vec<u64> {
        let mut p = vec![0u64; self.words_per_row];
        for &i in itemset.items() {
            p[i / 64] |= 1 << (i % 64);
        }
        p
    }

    /// Number of transactions containing every item of `itemset`.
    pub fn count(&self, itemset: &Itemset) -> Result<usize> {
        itemset.validate(self.m)?;
        Ok(self.count_unchecked(itemset))
    }

    pub(crate) fn count_unchecked(&self, itemset: &Itemset) -> usize {
        if self.words_per_row == 1 {
            let p = itemset.mask().unwrap_or(0);
            return self.count_mask(p);
        }
        let p = self.pattern(itemset);
        self.words
            .chunks_exact(self.words_per_row)
            .filter(|row| row.iter().zip(&p).all(|(w, q)| w & q == *q))
            .count()
    }

    /// Count for an itemset given as a mask; requires M ≤ 64.
    pub fn count_mask(&self, mask: u64) -> usize {
        debug_assert_eq!(self.words_per_row, 1);
        self.words.iter().filter(|&&w| w & mask == mask).count()
    }

    /// Indices of the transactions containing `itemset`, ascending.
    pub fn covering_rows(&self, itemset: &Itemset) -> Result<Vec<usize>> {
        itemset.validate(self.m)?;
        let p = self.pattern(itemset);
        Ok(self
            .words
            .chunks_exact(self.words_per_row)
            .enumerate()
            .filter(|(_, row)| row.iter().zip(&p).all(|(w, q)| w & q == *q))
            .map(|(r, _)| r)
            .collect())
    }

    /// Per-item occurrence counts.
    pub fn item_counts(&self) -> Vec<usize> {
        let mut c = vec![0usize; self.m];
        for r in 0..self.n {
            for (j, cj) in c.iter_mut().enumerate() {
                if self.get(r, j) {
                    *cj += 1;
                }
            }
        }
        c
    }

    /// Parses a header of labels followed by 0/1 rows.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let labels: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != labels.len() {
                return Err(MineError::Parse {
                    row: r + 1,
                    column: String::new(),
                    message: format!("{} cells, expected {}", rec.len(), labels.len()),
                });
            }
            let mut row = Vec::with_capacity(rec.len());
            for (j, cell) in rec.iter().enumerate() {
                match cell.trim() {
                    "0" => row.push(false),
                    "1" => row.push(true),
                    other => {
                        return Err(MineError::Parse {
                            row: r + 1,
                            column: labels[j].clone(),
                            message: format!("expected 0 or 1, found {other:?}"),
                        })
                    }
                }
            }
            rows.push(row);
        }
        Self::from_rows_with_labels(&rows, labels)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.labels)?;
        for r in 0..self.n {
            w.write_record((0..self.m).map(|j| if self.get(r, j) { "1" } else { "0" }))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_matrix_counts() {
        let m = 130;
        let rows: Vec<Vec<bool>> = (0..4)
            .map(|r| (0..m).map(|j| (j + r) % 2 == 0 || j == 129).collect())
            .collect();
        let t = TransactionMatrix::from_rows(&rows).unwrap();
        assert_eq!(t.count(&Itemset::from_items([0, 128, 129])).unwrap(), 2);
        assert_eq!(t.count(&Itemset::from_items([129])).unwrap(), 4);
        assert!(t.count(&Itemset::from_items([130])).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let t = TransactionMatrix::from_binary(&[vec![1, 0, 1], vec![0, 1, 1]]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = TransactionMatrix::read_csv(&buf[..]).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn csv_rejects_non_binary() {
        let err = TransactionMatrix::read_csv("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, MineError::Parse { row: 1, .. }));
    }
}
