use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::replay::Transition;
use crate::geometry::Vec3;
use crate::mdp::TerminalClass;
use crate::{Error, Result};

/// One environment step as observed by the learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawStep {
    pub state: Vec3,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec3,
    pub terminal_class: TerminalClass,
}

/// `sum_i gamma^i r_i`.
pub fn nstep_return(rewards: &[f64], gamma: f64) -> Result<f64> {
    if rewards.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut acc = 0.0;
    let mut disc = 1.0;
    for &r in rewards {
        acc += disc * r;
        disc *= gamma;
    }
    Ok(acc)
}

/// Queue of the latest `capacity` raw steps, turned into multi-step
/// transitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlidingWindow {
    capacity: usize,
    gamma: f64,
    steps: VecDeque<RawStep>,
}

impl SlidingWindow {
    pub fn new(capacity: usize, gamma: f64) -> Self {
        assert!(capacity > 0, "window capacity must be positive");
        Self { capacity, gamma, steps: VecDeque::with_capacity(capacity) }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn clear(&mut self) {
        self.steps.clear();
    }

    fn transition_from(&self, start: usize) -> Transition {
        let first = &self.steps[start];
        let last = self.steps.back().expect("non-empty window");
        let rewards: Vec<f64> = self.steps.iter().skip(start).map(|s| s.reward).collect();
        Transition {
            state: first.state,
            action: first.action,
            nstep_return: nstep_return(&rewards, self.gamma).expect("non-empty suffix"),
            bootstrap_state: last.next_state,
            terminal_class: last.terminal_class,
            horizon: rewards.len(),
        }
    }

    /// Appends a step; returns the full-window transition once the window
    /// holds `capacity` steps, dropping its oldest entry.
    pub fn push(&mut self, step: RawStep) -> Option<Transition> {
        self.steps.push_back(step);
        if self.steps.len() < self.capacity {
            return None;
        }
        let t = self.transition_from(0);
        self.steps.pop_front();
        Some(t)
    }

    /// Emits one truncated transition per remaining suffix and empties the
    /// window. Called when an episode ends.
    pub fn flush(&mut self) -> Vec<Transition> {
        let out = (0..self.steps.len()).map(|i| self.transition_from(i)).collect();
        self.steps.clear();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(i: usize, r: f64, class: TerminalClass) -> RawStep {
        RawStep {
            state: Vec3::new(i as f64, 0.0, 0.0),
            action: i % 4,
            reward: r,
            next_state: Vec3::new(i as f64 + 1.0, 0.0, 0.0),
            terminal_class: class,
        }
    }

    #[test]
    fn nstep_examples() {
        assert_eq!(nstep_return(&[-1.0; 30], 1.0).unwrap(), -30.0);
        assert!((nstep_return(&[1.0, 1.0], 0.9).unwrap() - 1.9).abs() < 1e-15);
        assert_eq!(nstep_return(&[-1.0, -11.0, -1.0], 1.0).unwrap(), -13.0);
        assert!(matches!(nstep_return(&[], 1.0), Err(Error::EmptyWindow)));
    }

    #[test]
    fn emits_when_full_and_flushes_suffixes() {
        let mut w = SlidingWindow::new(3, 1.0);
        let rewards = [-1.0, -2.0, -3.0, -4.0];
        let mut emitted = Vec::new();
        for (i, &r) in rewards.iter().enumerate() {
            let class = if i == 3 { TerminalClass::Destination } else { TerminalClass::None };
            emitted.extend(w.push(raw(i, r, class)));
            assert!(w.len() < 3);
        }
        assert_eq!(emitted.len(), 2);
        assert_eq!(emitted[0].nstep_return, -6.0);
        assert_eq!(emitted[0].bootstrap_state.x, 3.0);
        assert_eq!(emitted[1].nstep_return, -9.0);
        assert_eq!(emitted[1].terminal_class, TerminalClass::Destination);
        let tail = w.flush();
        assert_eq!(tail.len(), 2);
        assert_eq!((tail[0].nstep_return, tail[0].horizon), (-7.0, 2));
        assert_eq!((tail[1].nstep_return, tail[1].horizon), (-4.0, 1));
        assert!(tail.iter().all(|t| t.terminal_class == TerminalClass::Destination));
        assert!(w.is_empty());
    }

    #[test]
    fn short_episode_yields_one_transition_per_step() {
        let mut w = SlidingWindow::new(30, 0.5);
        for i in 0..4 {
            assert!(w.push(raw(i, 1.0, TerminalClass::None)).is_none());
        }
        let t = w.flush();
        assert_eq!(t.len(), 4);
        assert_eq!(t[0].nstep_return, 1.0 + 0.5 + 0.25 + 0.125);
    }
}
