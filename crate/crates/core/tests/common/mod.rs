#![allow(dead_code)]

use armine::{Itemset, TransactionMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const GROCERY: [&str; 7] = ["milk", "bread", "butter", "eggs", "beer", "diapers", "fruit"];

/// The five-transaction grocery table.
pub fn grocery() -> TransactionMatrix {
    let rows: Vec<Vec<u8>> = vec![
        vec![1, 1, 0, 0, 0, 0, 1],
        vec![0, 0, 1, 1, 0, 0, 1],
        vec![0, 0, 0, 0, 1, 1, 0],
        vec![1, 1, 1, 1, 0, 0, 1],
        vec![0, 1, 0, 0, 0, 0, 0],
    ];
    let mut t = TransactionMatrix::from_binary(&rows).unwrap();
    t.set_labels(GROCERY.iter().map(|s| s.to_string()).collect()).unwrap();
    t
}

pub fn item(name: &str) -> usize {
    GROCERY.iter().position(|g| *g == name).unwrap()
}

pub fn set(names: &[&str]) -> Itemset {
    Itemset::from_items(names.iter().map(|n| item(n)))
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, m: usize, density: f64) -> Vec<Vec<bool>> {
    (0..n).map(|_| (0..m).map(|_| rng.random_bool(density)).collect()).collect()
}

pub fn random_matrix(seed: u64, n: usize, m: usize, density: f64) -> TransactionMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TransactionMatrix::from_rows(&random_rows(&mut rng, n, m, density)).unwrap()
}

/// Direct row scan, independent of the packed layout.
pub fn brute_count(data: &TransactionMatrix, s: &Itemset) -> usize {
    (0..data.n_transactions())
        .filter(|&r| {
            let row = data.row(r);
            s.items().iter().all(|&i| row[i])
        })
        .count()
}

/// Exhaustive subset scan: frequent itemsets (sizes 1..=max) and rule keys with
/// (support, confidence, lift) as exact count ratios.
pub fn brute_force(
    data: &TransactionMatrix,
    min_support: f64,
    min_conf: f64,
    max_size: usize,
) -> (BTreeMap<Itemset, usize>, BTreeMap<(Itemset, Itemset), (usize, usize, usize)>) {
    let m = data.n_items();
    let n = data.n_transactions();
    let mut freq = BTreeMap::new();
    for mask in 1u64..(1u64 << m) {
        let s = Itemset::from_mask(mask);
        if s.len() > max_size {
            continue;
        }
        let c = brute_count(data, &s);
        // integer form of c/n >= min_support, with the same slack as the library
        if c as f64 / n as f64 >= min_support - 1e-12 {
            freq.insert(s, c);
        }
    }
    let mut rules = BTreeMap::new();
    for (s, &c) in &freq {
        if s.len() < 2 {
            continue;
        }
        let items = s.items();
        for sel in 1u64..((1u64 << items.len()) - 1) {
            let a = Itemset::from_items((0..items.len()).filter(|k| sel >> k & 1 == 1).map(|k| items[k]));
            let b = Itemset::from_items((0..items.len()).filter(|k| sel >> k & 1 == 0).map(|k| items[k]));
            let ca = freq[&a];
            if c as f64 / ca as f64 >= min_conf - 1e-12 {
                rules.insert((a.clone(), b.clone()), (c, ca, freq[&b]));
            }
        }
    }
    (freq, rules)
}
