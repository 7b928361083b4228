use super::{argmax_first, ucb_score};
use crate::config::MiningConfig;
use crate::error::{MineError, Result};
use crate::itemset::{enumerate_itemsets, Itemset};
use crate::metrics::{meets, SupportCache};
use crate::rule::{normalize_rules, FrequentItemsetTable, MiningOutput};
use crate::transactions::TransactionMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

/// Largest candidate pool the bandit will materialize.
const MAX_ARMS: usize = 1 << 24;
/// Item cap for the superset-update variant.
const MAX_EMAB_ITEMS: usize = 24;

/// Periodic removal of low-UCB arms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruningPolicy {
    /// Prune after every `every` steps.
    pub every: usize,
    /// Arms evaluated fewer times than this are never pruned.
    pub protect_below: usize,
    /// Share of the eligible arms (lowest UCB first) removed per pruning round.
    pub fraction: f64,
}

impl Default for PruningPolicy {
    fn default() -> Self {
        PruningPolicy { every: 100, protect_below: 10, fraction: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MabConfig {
    pub t_max: usize,
    pub m_min: usize,
    pub m_max: usize,
    pub pruning: Option<PruningPolicy>,
}

impl MabConfig {
    /// Budget `t_max` over itemsets of size 2..=m_max, no pruning.
    pub fn new(t_max: usize, m_max: usize) -> Self {
        MabConfig { t_max, m_min: 2, m_max, pruning: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MabOutput {
    pub output: MiningOutput,
    /// Evaluation count of every candidate arm, in candidate order.
    pub visit_log: Vec<(Itemset, usize)>,
    pub steps: usize,
}

/// One candidate itemset with its evaluation count and current estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Arm {
    pub itemset: Itemset,
    pub mask: u64,
    pub n: usize,
    pub estimate: f64,
    pub active: bool,
}

/// Number of itemsets with size in [lo, hi] over m items, saturating.
fn candidate_count(m: usize, lo: usize, hi: usize) -> usize {
    let mut total: usize = 0;
    let mut c: usize = 1;
    for k in 0..=hi {
        if k > 0 {
            c = c.saturating_mul(m - k + 1) / k;
        }
        if k >= lo {
            total = total.saturating_add(c);
        }
    }
    total
}

/// Live state of a bandit run; [`BanditState::step`] performs one selection and evaluation.
pub struct BanditState<'a> {
    arms: Vec<Arm>,
    t: usize,
    associative: bool,
    cfg: MiningConfig,
    pruning: Option<PruningPolicy>,
    cache: SupportCache<'a>,
    table: FrequentItemsetTable,
    rules: BTreeMap<(Itemset, Itemset), crate::rule::Rule>,
}

impl<'a> BanditState<'a> {
    pub fn new(data: &'a TransactionMatrix, cfg: &MiningConfig, mab: &MabConfig, associative: bool) -> Result<Self> {
        let m = data.n_items();
        cfg.validate(m)?;
        if m > 64 {
            return Err(MineError::TooLarge { what: "item count for the bandit miners", limit: 64, got: m });
        }
        if associative && m > MAX_EMAB_ITEMS {
            return Err(MineError::TooLarge { what: "item count for the associative bandit", limit: MAX_EMAB_ITEMS, got: m });
        }
        let pool = candidate_count(m, mab.m_min, mab.m_max.min(m));
        if pool > MAX_ARMS {
            return Err(MineError::TooLarge { what: "candidate itemset count", limit: MAX_ARMS, got: pool });
        }
        if let Some(p) = &mab.pruning {
            if p.every == 0 || !(0.0..=1.0).contains(&p.fraction) {
                return Err(MineError::InvalidConfig("pruning needs every >= 1 and fraction in [0, 1]".into()));
            }
        }
        let mut arms: Vec<Arm> = enumerate_itemsets(m, mab.m_min, mab.m_max)?
            .map(|s| Arm { mask: s.mask().expect("M <= 64"), itemset: s, n: 0, estimate: 0.0, active: true })
            .collect();
        arms.sort_by(|a, b| a.itemset.cmp(&b.itemset));
        Ok(BanditState {
            arms,
            t: 0,
            associative,
            cfg: cfg.clone(),
            pruning: mab.pruning.clone(),
            cache: SupportCache::new(data),
            table: FrequentItemsetTable::new(),
            rules: BTreeMap::new(),
        })
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    /// Steps taken so far.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Selects the max-UCB active arm (lexicographically smallest on ties),
    /// evaluates it and returns its index; `None` once every arm is pruned.
    pub fn step(&mut self) -> Option<usize> {
        let t = self.t + 1;
        let pick = argmax_first(self.arms.iter().map(|a| {
            if a.active {
                ucb_score(a.estimate, a.n, t)
            } else {
                f64::NEG_INFINITY
            }
        }))?;
        if !self.arms[pick].active {
            return None;
        }
        self.t = t;
        let p = self.cache.support_mask(self.arms[pick].mask);
        let arm = &mut self.arms[pick];
        arm.n += 1;
        arm.estimate = p;
        if meets(p, self.cfg.min_support) {
            self.table.insert(arm.itemset.clone(), p);
            let set = arm.itemset.clone();
            for r in self.cache.rules_for(&set, self.cfg.min_confidence) {
                self.rules.insert((r.antecedent.clone(), r.consequent.clone()), r);
            }
        }
        if self.associative {
            let star = self.arms[pick].mask;
            lift_supersets(&mut self.arms, star, p);
        }
        if let Some(policy) = &self.pruning {
            if t % policy.every == 0 {
                prune(&mut self.arms, policy, t);
            }
        }
        Some(pick)
    }

    pub fn finish(self) -> MabOutput {
        MabOutput {
            output: MiningOutput { itemsets: self.table, rules: normalize_rules(self.rules.into_values().collect()) },
            visit_log: self.arms.iter().map(|a| (a.itemset.clone(), a.n)).collect(),
            steps: self.t,
        }
    }
}

fn run(data: &TransactionMatrix, cfg: &MiningConfig, mab: &MabConfig, associative: bool) -> Result<MabOutput> {
    if mab.t_max == 0 {
        return Err(MineError::InvalidConfig("t_max must be at least 1".into()));
    }
    let mut state = BanditState::new(data, cfg, mab, associative)?;
    for _ in 0..mab.t_max {
        if state.step().is_none() {
            break;
        }
    }
    Ok(state.finish())
}

/// Raises the estimate of every active strict superset of `evaluated` to at least `estimate`.
pub fn lift_supersets(arms: &mut [Arm], evaluated: u64, estimate: f64) {
    for a in arms.iter_mut() {
        if a.active && a.mask & evaluated == evaluated && a.mask != evaluated && a.estimate < estimate {
            a.estimate = estimate;
        }
    }
}

fn prune(arms: &mut [Arm], policy: &PruningPolicy, t: usize) {
    let mut eligible: Vec<(f64, usize)> = arms
        .iter()
        .enumerate()
        .filter(|(_, a)| a.active && a.n >= policy.protect_below)
        .map(|(i, a)| (ucb_score(a.estimate, a.n, t), i))
        .collect();
    // lowest UCB first; among equals the lexicographically larger itemset goes first
    eligible.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
    let k = (eligible.len() as f64 * policy.fraction).floor() as usize;
    for &(_, i) in &eligible[..k] {
        arms[i].active = false;
    }
}

/// UCB1 over candidate itemsets, evaluating empirical support of the chosen arm each step.
pub fn mine_mab(data: &TransactionMatrix, cfg: &MiningConfig, mab: &MabConfig) -> Result<MabOutput> {
    run(data, cfg, mab, false)
}

/// As [`mine_mab`], and after each evaluation raises the stale estimate of every
/// strict superset of the evaluated itemset to at least the new value.
pub fn mine_emab(data: &TransactionMatrix, cfg: &MiningConfig, mab: &MabConfig) -> Result<MabOutput> {
    run(data, cfg, mab, true)
}

/// Writes `itemset,evaluations` rows with labels joined by `|`.
pub fn write_visit_log<W: Write>(writer: W, log: &[(Itemset, usize)], labels: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["itemset", "evaluations"])?;
    for (s, n) in log {
        w.write_record([s.label(labels), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
