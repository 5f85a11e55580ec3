use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::mdp::TerminalClass;

/// Multi-step experience tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec3,
    pub action: usize,
    /// Discounted reward sum over the window.
    pub nstep_return: f64,
    pub bootstrap_state: Vec3,
    pub terminal_class: TerminalClass,
    /// Number of rewards summed; the bootstrap discount is `gamma^horizon`.
    pub horizon: usize,
}

/// Bounded FIFO replay memory; the oldest transition is evicted first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayMemory {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, items: VecDeque::with_capacity(capacity.min(1 << 16)) }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// Uniform sample with replacement.
    pub fn sample<'a, R: Rng + ?Sized>(&'a self, n: usize, rng: &mut R) -> Vec<&'a Transition> {
        (0..n).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(tag: usize) -> Transition {
        Transition {
            state: Vec3::default(),
            action: tag,
            nstep_return: 0.0,
            bootstrap_state: Vec3::default(),
            terminal_class: TerminalClass::None,
            horizon: 1,
        }
    }

    #[test]
    fn evicts_oldest_first() {
        let mut r = ReplayMemory::new(3);
        for i in 0..5 {
            r.push(t(i));
            assert!(r.len() <= 3);
        }
        let tags: Vec<usize> = r.iter().map(|x| x.action).collect();
        assert_eq!(tags, vec![2, 3, 4]);
    }
}
