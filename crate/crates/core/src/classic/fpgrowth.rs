use super::{finish, is_frequent};
use crate::config::MiningConfig;
use crate::error::Result;
use crate::itemset::Itemset;
use crate::rule::MiningOutput;
use crate::transactions::TransactionMatrix;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
struct Node {
    item: usize,
    count: usize,
    parent: Option<usize>,
    children: Vec<(usize, usize)>,
}

/// Prefix tree of weighted transactions with per-item header chains.
///
/// Node 0 is the root.
#[derive(Clone, Debug)]
pub struct FpTree {
    nodes: Vec<Node>,
    header: BTreeMap<usize, Vec<usize>>,
    item_totals: BTreeMap<usize, usize>,
}

impl FpTree {
    /// Inserts each `(items, weight)` path; items must already be in tree order.
    fn from_paths(paths: &[(Vec<usize>, usize)]) -> Self {
        let mut t = FpTree {
            nodes: vec![Node { item: usize::MAX, count: 0, parent: None, children: Vec::new() }],
            header: BTreeMap::new(),
            item_totals: BTreeMap::new(),
        };
        for (items, w) in paths {
            let mut cur = 0;
            t.nodes[0].count += w;
            for &it in items {
                *t.item_totals.entry(it).or_default() += w;
                let found = t.nodes[cur].children.iter().find(|(i, _)| *i == it).map(|&(_, c)| c);
                cur = match found {
                    Some(c) => {
                        t.nodes[c].count += w;
                        c
                    }
                    None => {
                        let id = t.nodes.len();
                        t.nodes.push(Node { item: it, count: *w, parent: Some(cur), children: Vec::new() });
                        t.nodes[cur].children.push((it, id));
                        t.header.entry(it).or_default().push(id);
                        id
                    }
                };
            }
        }
        t
    }

    /// Tree over the frequent items of `data`, ordered by descending count then index.
    pub fn build(data: &TransactionMatrix, cfg: &MiningConfig) -> (Self, Vec<usize>) {
        let n = data.n_transactions();
        let counts = data.item_counts();
        let mut order: Vec<usize> = (0..data.n_items()).filter(|&j| is_frequent(counts[j], n, cfg)).collect();
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        let paths: Vec<(Vec<usize>, usize)> = (0..n)
            .map(|r| (order.iter().copied().filter(|&j| data.get(r, j)).collect(), 1))
            .collect();
        let mut rank = vec![usize::MAX; data.n_items()];
        for (p, &j) in order.iter().enumerate() {
            rank[j] = p;
        }
        (Self::from_paths(&paths), rank)
    }

    /// Sum of the node counts along an item's header chain.
    pub fn header_total(&self, item: usize) -> usize {
        self.header.get(&item).map_or(0, |ids| ids.iter().map(|&i| self.nodes[i].count).sum())
    }

    /// Total weight of transactions containing `item`, as seen during insertion.
    pub fn item_total(&self, item: usize) -> usize {
        self.item_totals.get(&item).copied().unwrap_or(0)
    }

    /// True when no node's count exceeds its parent's.
    pub fn counts_nested(&self) -> bool {
        self.nodes.iter().skip(1).all(|nd| nd.count <= self.nodes[nd.parent.expect("non-root")].count)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn prefix_path(&self, mut id: usize) -> Vec<usize> {
        let mut path = Vec::new();
        while let Some(p) = self.nodes[id].parent {
            if p == 0 {
                break;
            }
            path.push(self.nodes[p].item);
            id = p;
        }
        path.reverse();
        path
    }
}

/// Pattern growth over conditional FP-trees.
pub fn mine_fpgrowth(data: &TransactionMatrix, cfg: &MiningConfig) -> Result<MiningOutput> {
    cfg.validate(data.n_items())?;
    let n = data.n_transactions();
    let (tree, rank) = FpTree::build(data, cfg);
    let mut counts = BTreeMap::new();
    grow(&tree, &Itemset::empty(), &rank, n, cfg, &mut counts);
    Ok(finish(&counts, n, cfg))
}

fn grow(
    tree: &FpTree,
    suffix: &Itemset,
    rank: &[usize],
    n: usize,
    cfg: &MiningConfig,
    counts: &mut BTreeMap<Itemset, usize>,
) {
    for (&item, ids) in &tree.header {
        let total: usize = ids.iter().map(|&i| tree.nodes[i].count).sum();
        if !is_frequent(total, n, cfg) {
            continue;
        }
        let set = suffix.with(item);
        counts.insert(set.clone(), total);
        if set.len() >= cfg.max_itemset_size {
            continue;
        }
        // conditional pattern base, keeping items that stay frequent within it
        let base: Vec<(Vec<usize>, usize)> =
            ids.iter().map(|&i| (tree.prefix_path(i), tree.nodes[i].count)).collect();
        let mut local: BTreeMap<usize, usize> = BTreeMap::new();
        for (p, w) in &base {
            for &it in p {
                *local.entry(it).or_default() += w;
            }
        }
        let paths: Vec<(Vec<usize>, usize)> = base
            .into_iter()
            .map(|(p, w)| {
                let mut kept: Vec<usize> = p.into_iter().filter(|it| is_frequent(local[it], n, cfg)).collect();
                kept.sort_by_key(|&it| rank[it]);
                (kept, w)
            })
            .filter(|(p, _)| !p.is_empty())
            .collect();
        if paths.is_empty() {
            continue;
        }
        let cond = FpTree::from_paths(&paths);
        grow(&cond, &set, rank, n, cfg, counts);
    }
}
