use super::{finish, is_frequent};
use crate::config::MiningConfig;
use crate::error::Result;
use crate::itemset::Itemset;
use crate::rule::MiningOutput;
use crate::transactions::TransactionMatrix;
use std::collections::BTreeMap;

/// Vertical layout: for each item, the ascending ids of the transactions containing it.
#[derive(Clone, Debug, PartialEq)]
pub struct TidsetIndex {
    pub tidsets: Vec<Vec<u32>>,
}

impl TidsetIndex {
    pub fn build(data: &TransactionMatrix) -> Self {
        let mut tidsets = vec![Vec::new(); data.n_items()];
        for r in 0..data.n_transactions() {
            for (j, t) in tidsets.iter_mut().enumerate() {
                if data.get(r, j) {
                    t.push(r as u32);
                }
            }
        }
        TidsetIndex { tidsets }
    }
}

/// Intersection of two ascending tid sequences.
pub fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Depth-first tidset intersection over prefix equivalence classes.
pub fn mine_eclat(data: &TransactionMatrix, cfg: &MiningConfig) -> Result<MiningOutput> {
    cfg.validate(data.n_items())?;
    let n = data.n_transactions();
    let index = TidsetIndex::build(data);
    let mut counts = BTreeMap::new();
    let class: Vec<(Itemset, Vec<u32>)> = index
        .tidsets
        .into_iter()
        .enumerate()
        .filter(|(_, t)| is_frequent(t.len(), n, cfg))
        .map(|(j, t)| (Itemset::from_items([j]), t))
        .collect();
    extend(&class, n, cfg, &mut counts);
    Ok(finish(&counts, n, cfg))
}

fn extend(class: &[(Itemset, Vec<u32>)], n: usize, cfg: &MiningConfig, counts: &mut BTreeMap<Itemset, usize>) {
    for (x, (s, t)) in class.iter().enumerate() {
        counts.insert(s.clone(), t.len());
        if s.len() >= cfg.max_itemset_size {
            continue;
        }
        let mut sub = Vec::new();
        for (s2, t2) in &class[x + 1..] {
            let tt = intersect(t, t2);
            if is_frequent(tt.len(), n, cfg) {
                sub.push((s.with(*s2.items().last().expect("non-empty")), tt));
            }
        }
        if !sub.is_empty() {
            extend(&sub, n, cfg, counts);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersect_example() {
        assert_eq!(intersect(&[1, 3, 5], &[3, 5, 9]), vec![3, 5]);
    }
}
