use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;

use crate::error::{MineError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// Item mask of the next state, used to mask invalid follow-up actions.
    pub next_mask: u64,
    pub terminal: bool,
}

/// Fixed-capacity FIFO of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(MineError::InvalidConfig("replay capacity must be positive".into()));
        }
        Ok(ReplayBuffer { capacity, items: VecDeque::with_capacity(capacity.min(1 << 16)) })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Evicts the oldest transition when full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// `size` distinct transitions chosen uniformly. Fails while fewer than `size` are stored.
    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        if size == 0 || self.items.len() < size {
            return Err(MineError::InvalidConfig(format!(
                "cannot sample {size} transitions from a buffer holding {}",
                self.items.len()
            )));
        }
        Ok(index::sample(rng, self.items.len(), size).into_iter().map(|i| &self.items[i]).collect())
    }
}
