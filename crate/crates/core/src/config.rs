use crate::error::{MineError, Result};
use serde::{Deserialize, Serialize};

/// Thresholds shared by all miners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub min_support: f64,
    pub min_confidence: f64,
    pub max_itemset_size: usize,
    pub seed: u64,
}

impl MiningConfig {
    pub fn new(min_support: f64, min_confidence: f64, max_itemset_size: usize) -> Self {
        MiningConfig { min_support, min_confidence, max_itemset_size, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks the thresholds and the size cap against `m` items.
    pub fn validate(&self, m: usize) -> Result<()> {
        for (name, v) in [("min_support", self.min_support), ("min_confidence", self.min_confidence)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(MineError::InvalidConfig(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        if self.max_itemset_size < 2 {
            return Err(MineError::InvalidConfig(format!(
                "max_itemset_size must be at least 2, got {}",
                self.max_itemset_size
            )));
        }
        if self.max_itemset_size > m {
            return Err(MineError::InvalidConfig(format!(
                "max_itemset_size {} exceeds the item count {m}",
                self.max_itemset_size
            )));
        }
        Ok(())
    }
}
