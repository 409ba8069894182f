use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::Observation;

/// One joint environment step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Vec<Observation>,
    pub actions: Vec<[f32; 2]>,
    /// Training rewards (raw plus shaping).
    pub rewards: Vec<f32>,
    pub next_obs: Vec<Observation>,
    pub done: bool,
    pub alive: Vec<bool>,
    pub next_alive: Vec<bool>,
}

impl Transition {
    pub fn agents(&self) -> usize {
        self.actions.len()
    }
}

/// Fixed-capacity ring buffer with uniform sampling; the oldest item is
/// overwritten once full.
#[derive(Clone, Debug)]
pub struct ReplayBuffer<T = Transition> {
    capacity: usize,
    items: Vec<T>,
    head: usize,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: Vec::new(),
            head: 0,
        }
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

    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.head] = item;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// Items from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items[self.head..].iter().chain(&self.items[..self.head])
    }

    /// `n` items drawn uniformly with replacement; empty when the buffer is.
    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<&T> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect()
    }
}
