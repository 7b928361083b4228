//! Upper-confidence-bound miners: a multi-armed bandit over candidate
//! itemsets, its variant with optimistic superset updates, and Monte Carlo
//! tree search over the itemset lattice.

mod mab;
mod mcts;

pub use mab::{mine_emab, mine_mab, lift_supersets, Arm, BanditState, write_visit_log, MabConfig, MabOutput, PruningPolicy};
pub use mcts::{mine_mcts, MctsConfig, MctsNode, MctsOutput, MctsTree, RewardMode};

/// p̂ + √(2 ln t / n), or +∞ for an arm that has never been evaluated.
pub fn ucb_score(estimate: f64, n: usize, t: usize) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    estimate + (2.0 * (t.max(1) as f64).ln() / n as f64).sqrt()
}

/// Index of the largest score; the first one wins ties.
pub fn argmax_first(scores: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}
