//! Itemsets as sorted index sequences, plus lattice enumeration helpers.

use crate::error::{MineError, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A sorted, duplicate-free set of item indices.
///
/// Ordering is lexicographic over the index sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Itemset(Vec<usize>);

impl Itemset {
    /// Builds an itemset from indices that must already be strictly ascending.
    pub fn new(items: Vec<usize>) -> Result<Self> {
        if items.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MineError::InvalidItemset(format!(
                "indices must be strictly ascending: {items:?}"
            )));
        }
        Ok(Itemset(items))
    }

    /// Sorts and deduplicates arbitrary indices.
    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> Self {
        let mut v: Vec<usize> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Itemset(v)
    }

    pub fn empty() -> Self {
        Itemset(Vec::new())
    }

    /// Decodes the set bits of a mask.
    pub fn from_mask(mask: u64) -> Self {
        let mut v = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            v.push(i);
            m &= m - 1;
        }
        Itemset(v)
    }

    /// Bitmask form; `None` when an index is 64 or larger.
    pub fn mask(&self) -> Option<u64> {
        let mut m = 0u64;
        for &i in &self.0 {
            if i >= 64 {
                return None;
            }
            m |= 1 << i;
        }
        Some(m)
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn is_subset_of(&self, other: &Itemset) -> bool {
        let mut it = other.0.iter();
        'outer: for x in &self.0 {
            for y in it.by_ref() {
                if y == x {
                    continue 'outer;
                }
                if y > x {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &Itemset) -> Itemset {
        Itemset::from_items(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn is_disjoint(&self, other: &Itemset) -> bool {
        !self.0.iter().any(|i| other.contains(*i))
    }

    /// Copy with one extra item.
    pub fn with(&self, item: usize) -> Itemset {
        let mut v = self.0.clone();
        match v.binary_search(&item) {
            Ok(_) => {}
            Err(pos) => v.insert(pos, item),
        }
        Itemset(v)
    }

    /// Checks every index against the item count `m`.
    pub fn validate(&self, m: usize) -> Result<()> {
        if let Some(&last) = self.0.last() {
            if last >= m {
                return Err(MineError::InvalidItemset(format!(
                    "index {last} out of range for {m} items"
                )));
            }
        }
        Ok(())
    }

    /// Renders as labels joined with `|`.
    pub fn label(&self, labels: &[String]) -> String {
        self.0
            .iter()
            .map(|&i| labels.get(i).cloned().unwrap_or_else(|| i.to_string()))
            .collect::<Vec<_>>()
            .join("|")
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl From<&[usize]> for Itemset {
    fn from(v: &[usize]) -> Self {
        Itemset::from_items(v.iter().copied())
    }
}

/// Lexicographic k-combinations of `0..m`, for k running from `m_min` to `m_max`.
#[derive(Clone, Debug)]
pub struct ItemsetEnumeration {
    m: usize,
    m_max: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for ItemsetEnumeration {
    type Item = Itemset;

    fn next(&mut self) -> Option<Itemset> {
        let cur = self.current.as_mut()?;
        let out = Itemset(cur.clone());
        let k = cur.len();
        // advance to the next combination of the same size, or grow
        let mut pos = k;
        while pos > 0 && cur[pos - 1] == self.m - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            if k < self.m_max {
                self.current = Some((0..k + 1).collect());
            } else {
                self.current = None;
            }
        } else {
            cur[pos - 1] += 1;
            for j in pos..k {
                cur[j] = cur[j - 1] + 1;
            }
        }
        Some(out)
    }
}

/// Every itemset of size `m_min..=m_max` over `m` items, lexicographic within each size.
pub fn enumerate_itemsets(m: usize, m_min: usize, m_max: usize) -> Result<ItemsetEnumeration> {
    if m_min < 1 || m_min > m_max || m_max > m {
        return Err(MineError::InvalidConfig(format!(
            "need 1 <= m_min <= m_max <= M, got m_min={m_min}, m_max={m_max}, M={m}"
        )));
    }
    Ok(ItemsetEnumeration {
        m,
        m_max,
        current: Some((0..m_min).collect()),
    })
}

/// Iterator over the ordered two-part splits of an itemset.
#[derive(Clone, Debug)]
pub struct Splits {
    items: Vec<usize>,
    next: u64,
    full: u64,
}

impl Iterator for Splits {
    type Item = (Itemset, Itemset);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.full {
            return None;
        }
        let sel = self.next;
        self.next += 1;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (k, &i) in self.items.iter().enumerate() {
            if sel >> k & 1 == 1 {
                a.push(i);
            } else {
                b.push(i);
            }
        }
        Some((Itemset(a), Itemset(b)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.full - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Splits {}

/// All (antecedent, consequent) partitions of an itemset into two non-empty parts.
pub fn split_rule(itemset: &Itemset) -> Result<Splits> {
    let k = itemset.len();
    if k < 2 {
        return Err(MineError::InvalidSplit(format!(
            "itemset {itemset} has fewer than two items"
        )));
    }
    if k > 62 {
        return Err(MineError::TooLarge { what: "itemset size for splitting", limit: 62, got: k });
    }
    Ok(Splits { items: itemset.0.clone(), next: 1, full: (1u64 << k) - 1 })
}
