//! Deterministic per-task seed derivation.

use crate::itemset::Itemset;

/// FNV-1a over the item indices.
pub fn itemset_hash(s: &Itemset) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &i in s.items() {
        for b in (i as u64).to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Seed for work on `itemset`: the base seed xor the itemset hash.
pub fn itemset_seed(seed: u64, itemset: &Itemset) -> u64 {
    seed ^ itemset_hash(itemset)
}

/// Seed for a sub-task of `outer` (e.g. a split part), distinct from `itemset_seed(seed, part)`.
pub fn nested_seed(seed: u64, outer: &Itemset, part: &Itemset) -> u64 {
    seed ^ itemset_hash(part) ^ itemset_hash(outer).rotate_left(29) ^ 0x9e37_79b9_7f4a_7c15
}
