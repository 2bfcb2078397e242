use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;

/// One step of experience, with states already encoded for the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Bounded FIFO experience pool; the oldest transition is evicted first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(t);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.entries.iter()
    }

    /// `size` distinct transitions chosen uniformly, or `None` if the buffer
    /// holds fewer.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, size: usize) -> Option<Vec<&Transition>> {
        if size > self.entries.len() {
            return None;
        }
        Some(
            index::sample(rng, self.entries.len(), size)
                .into_iter()
                .map(|i| &self.entries[i])
                .collect(),
        )
    }
}
