use super::{finish, is_frequent};
use crate::config::MiningConfig;
use crate::error::Result;
use crate::itemset::Itemset;
use crate::rule::MiningOutput;
use crate::transactions::TransactionMatrix;
use std::collections::{BTreeMap, HashSet};

/// Level-wise candidate generation with prefix join and subset pruning.
pub fn mine_apriori(data: &TransactionMatrix, cfg: &MiningConfig) -> Result<MiningOutput> {
    cfg.validate(data.n_items())?;
    let n = data.n_transactions();
    let mut counts: BTreeMap<Itemset, usize> = BTreeMap::new();

    let mut level: Vec<Itemset> = Vec::new();
    for (j, c) in data.item_counts().into_iter().enumerate() {
        if is_frequent(c, n, cfg) {
            let s = Itemset::from_items([j]);
            counts.insert(s.clone(), c);
            level.push(s);
        }
    }

    let mut k = 1;
    while !level.is_empty() && k < cfg.max_itemset_size {
        let prev: HashSet<&Itemset> = level.iter().collect();
        let mut next = Vec::new();
        for (x, a) in level.iter().enumerate() {
            for b in &level[x + 1..] {
                let (pa, pb) = (&a.items()[..k - 1], &b.items()[..k - 1]);
                if pa != pb {
                    break;
                }
                let cand = a.with(b.items()[k - 1]);
                let all_sub_frequent = (0..cand.len()).all(|drop| {
                    let sub = Itemset::from_items(
                        cand.items().iter().enumerate().filter(|(p, _)| *p != drop).map(|(_, &i)| i),
                    );
                    prev.contains(&sub)
                });
                if !all_sub_frequent {
                    continue;
                }
                let c = data.count_unchecked(&cand);
                if is_frequent(c, n, cfg) {
                    counts.insert(cand.clone(), c);
                    next.push(cand);
                }
            }
        }
        level = next;
        k += 1;
    }
    Ok(finish(&counts, n, cfg))
}
