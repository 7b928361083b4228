//! Association rule mining with exact, probabilistic, bandit and reinforcement-learning miners.
//!
//! Frequency-based miners ([`classic`], [`bandit`], [`rlar`]) report exact empirical
//! metrics. [`gpar`] and [`barm`] report model-based probability estimates.

pub mod bandit;
pub mod barm;
pub mod classic;
pub mod config;
pub mod data;
pub mod error;
pub mod features;
pub mod gpar;
pub mod itemset;
pub mod kernels;
pub mod metrics;
pub mod rlar;
pub mod rule;
pub mod seeding;
pub mod transactions;

pub use config::MiningConfig;
pub use error::{MineError, Result};
pub use features::FeatureMatrix;
pub use itemset::{enumerate_itemsets, split_rule, Itemset};
pub use metrics::{confidence, lift, support, SupportCache};
pub use rule::{FrequentItemsetTable, MiningOutput, Rule};
pub use transactions::TransactionMatrix;
