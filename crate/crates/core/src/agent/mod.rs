//! Dueling double-DQN with multi-step returns: exploration, experience
//! windows, replay, target construction and the training loop.

mod replay;
mod trainer;
mod window;

pub use replay::{ReplayMemory, Transition};
pub use trainer::{greedy_rollout, train_direct, NoPlanning, Planner, Rollout, TrainingState};
pub use window::{nstep_return, RawStep, SlidingWindow};

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::mdp::{NavModel, TerminalClass};
use crate::neural::{argmax, AdamState, DuelingNet};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub episodes: usize,
    pub epsilon0: f64,
    pub epsilon_decay: f64,
    pub replay_capacity: usize,
    /// Steps per multi-step return.
    pub n_step: usize,
    /// Target network refresh period, in episodes.
    pub target_sync_episodes: usize,
    pub gamma: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    /// Run the distance-based initialization before training.
    pub distance_init: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 5000,
            epsilon0: 0.5,
            epsilon_decay: 0.998,
            replay_capacity: 100_000,
            n_step: 30,
            target_sync_episodes: 5,
            gamma: 1.0,
            batch_size: 32,
            learning_rate: 1e-4,
            hidden: vec![512, 256, 128, 128],
            distance_init: true,
        }
    }
}

/// Multiplicative per-step exploration decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub epsilon0: f64,
    pub decay: f64,
    pub current: f64,
}

impl EpsilonSchedule {
    pub fn new(epsilon0: f64, decay: f64) -> Self {
        Self { epsilon0, decay, current: epsilon0 }
    }

    pub fn advance(&mut self) {
        self.current *= self.decay;
    }
}

pub fn network_input(model: &NavModel, q: Vec3) -> [f64; 3] {
    model.normalize(q)
}

pub fn q_values(net: &DuelingNet<f64>, model: &NavModel, q: Vec3) -> Vec<f64> {
    net.q_values(&network_input(model, q))
}

pub fn greedy_action(net: &DuelingNet<f64>, model: &NavModel, q: Vec3) -> usize {
    argmax(&q_values(net, model, q))
}

/// Epsilon-greedy choice. Always consumes one uniform draw, plus one more
/// when exploring.
pub fn select_action<R: Rng + ?Sized>(
    net: &DuelingNet<f64>,
    model: &NavModel,
    q: Vec3,
    epsilon: f64,
    rng: &mut R,
) -> usize {
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..model.n_actions())
    } else {
        greedy_action(net, model, q)
    }
}

/// Learning target for one transition: terminal bonus or penalty, or the
/// double-DQN bootstrap (online argmax, target evaluation).
pub fn build_target(
    t: &Transition,
    online: &DuelingNet<f64>,
    target: &DuelingNet<f64>,
    model: &NavModel,
    gamma: f64,
) -> f64 {
    match t.terminal_class {
        TerminalClass::Destination => t.nstep_return + model.dest_reward,
        TerminalClass::Outbound => t.nstep_return - model.outbound_penalty,
        TerminalClass::None | TerminalClass::StepLimit => {
            let best = greedy_action(online, model, t.bootstrap_state);
            let q = q_values(target, model, t.bootstrap_state)[best];
            t.nstep_return + gamma.powi(t.horizon as i32) * q
        }
    }
}

/// Mutable learning state shared by real and simulated experience.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Learner {
    pub online: DuelingNet<f64>,
    pub target: DuelingNet<f64>,
    pub opt: AdamState<f64>,
    pub replay: ReplayMemory,
    pub epsilon: EpsilonSchedule,
    pub updates: u64,
}

impl Learner {
    pub fn new(online: DuelingNet<f64>, cfg: &TrainConfig) -> Self {
        Self {
            target: online.clone(),
            opt: AdamState::new(online.num_params(), cfg.learning_rate),
            online,
            replay: ReplayMemory::new(cfg.replay_capacity),
            epsilon: EpsilonSchedule::new(cfg.epsilon0, cfg.epsilon_decay),
            updates: 0,
        }
    }

    pub fn sync_target(&mut self) {
        self.target = crate::neural::sync_target(&self.online);
    }

    /// One gradient step on a uniformly sampled minibatch; skipped while the
    /// replay holds fewer transitions than a batch. Returns the batch loss.
    pub fn update<R: Rng + ?Sized>(&mut self, model: &NavModel, cfg: &TrainConfig, rng: &mut R) -> Result<Option<f64>> {
        if self.replay.len() < cfg.batch_size {
            return Ok(None);
        }
        let batch = self.replay.sample(cfg.batch_size, rng);
        let b = batch.len();
        let mut x = Array2::zeros((b, 3));
        let mut x_next = Array2::zeros((b, 3));
        for (i, t) in batch.iter().enumerate() {
            for c in 0..3 {
                x[[i, c]] = network_input(model, t.state)[c];
                x_next[[i, c]] = network_input(model, t.bootstrap_state)[c];
            }
        }
        let q_next_online = self.online.forward(x_next.view());
        let q_next_target = self.target.forward(x_next.view());
        let (q, cache) = self.online.forward_cached(x.view());
        let mut d_q = Array2::zeros(q.dim());
        let mut loss = 0.0;
        for (i, t) in batch.iter().enumerate() {
            let y = match t.terminal_class {
                TerminalClass::Destination => t.nstep_return + model.dest_reward,
                TerminalClass::Outbound => t.nstep_return - model.outbound_penalty,
                TerminalClass::None | TerminalClass::StepLimit => {
                    let row = q_next_online.row(i);
                    let best = argmax(row.as_slice().expect("contiguous row"));
                    t.nstep_return + cfg.gamma.powi(t.horizon as i32) * q_next_target[[i, best]]
                }
            };
            let err = q[[i, t.action]] - y;
            loss += err * err;
            d_q[[i, t.action]] = 2.0 * err / b as f64;
        }
        let grads = self.online.backward(&cache, &d_q);
        self.opt.step(&mut self.online.body, &grads)?;
        self.updates += 1;
        Ok(Some(loss / b as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::NavParams;

    fn model() -> NavModel {
        NavModel::new(&NavParams::default()).unwrap()
    }

    fn tiny_net(seed: u64) -> DuelingNet<f64> {
        DuelingNet::new(3, &[6], 4, &mut crate::rngs::indexed(seed, 0)).unwrap()
    }

    fn transition(ret: f64, class: TerminalClass) -> Transition {
        Transition {
            state: Vec3::new(100.0, 100.0, 100.0),
            action: 0,
            nstep_return: ret,
            bootstrap_state: Vec3::new(400.0, 100.0, 100.0),
            terminal_class: class,
            horizon: 30,
        }
    }

    #[test]
    fn terminal_targets() {
        let m = model();
        let (a, b) = (tiny_net(1), tiny_net(2));
        assert_eq!(build_target(&transition(-30.0, TerminalClass::Destination), &a, &b, &m, 1.0), 170.0);
        assert_eq!(build_target(&transition(-30.0, TerminalClass::Outbound), &a, &b, &m, 1.0), -10030.0);
    }

    #[test]
    fn double_dqn_bootstrap() {
        let m = model();
        let (online, target) = (tiny_net(3), tiny_net(4));
        let t = transition(-30.0, TerminalClass::None);
        let qo = q_values(&online, &m, t.bootstrap_state);
        let qt = q_values(&target, &m, t.bootstrap_state);
        let expect = -30.0 + qt[argmax(&qo)];
        assert_eq!(build_target(&t, &online, &target, &m, 1.0), expect);
        let step_limit = transition(-30.0, TerminalClass::StepLimit);
        assert_eq!(build_target(&step_limit, &online, &target, &m, 1.0), expect);
    }

    #[test]
    fn epsilon_decay_arithmetic() {
        let mut e = EpsilonSchedule::new(0.5, 0.998);
        for _ in 0..100 {
            e.advance();
        }
        assert!((e.current - 0.5 * 0.998f64.powi(100)).abs() < 1e-12);
        assert!((e.current - 0.409283).abs() < 1e-6);
    }

    #[test]
    fn greedy_when_epsilon_zero() {
        let m = model();
        let net = tiny_net(5);
        let mut rng = crate::rngs::indexed(0, 0);
        let q = Vec3::new(300.0, 700.0, 100.0);
        let g = greedy_action(&net, &m, q);
        assert!((0..100).all(|_| select_action(&net, &m, q, 0.0, &mut rng) == g));
    }

    #[test]
    fn update_waits_for_a_full_batch() {
        let m = model();
        let cfg = TrainConfig { batch_size: 4, hidden: vec![6], ..Default::default() };
        let mut learner = Learner::new(tiny_net(6), &cfg);
        let mut rng = crate::rngs::indexed(0, 1);
        learner.replay.push(transition(-3.0, TerminalClass::None));
        assert_eq!(learner.update(&m, &cfg, &mut rng).unwrap(), None);
        for _ in 0..3 {
            learner.replay.push(transition(-3.0, TerminalClass::Destination));
        }
        assert!(learner.update(&m, &cfg, &mut rng).unwrap().is_some());
        assert_eq!(learner.updates, 1);
    }

    #[test]
    fn target_frozen_between_syncs() {
        let m = model();
        let cfg = TrainConfig { batch_size: 2, hidden: vec![6], ..Default::default() };
        let mut learner = Learner::new(tiny_net(7), &cfg);
        let probe = Vec3::new(500.0, 500.0, 100.0);
        let before = q_values(&learner.target, &m, probe);
        for _ in 0..4 {
            learner.replay.push(transition(-5.0, TerminalClass::Destination));
        }
        let mut rng = crate::rngs::indexed(0, 2);
        learner.update(&m, &cfg, &mut rng).unwrap();
        assert_eq!(q_values(&learner.target, &m, probe), before);
        assert_ne!(q_values(&learner.online, &m, probe), before);
        learner.sync_target();
        assert_eq!(q_values(&learner.target, &m, probe), q_values(&learner.online, &m, probe));
        let snapshot = learner.target.clone();
        learner.sync_target();
        assert_eq!(learner.target, snapshot);
    }

    #[test]
    fn updates_descend_on_a_fixed_batch() {
        let m = model();
        let cfg = TrainConfig { batch_size: 4, hidden: vec![6], learning_rate: 1e-3, ..Default::default() };
        let mut learner = Learner::new(tiny_net(8), &cfg);
        for _ in 0..4 {
            learner.replay.push(transition(-30.0, TerminalClass::Destination));
        }
        let mut rng = crate::rngs::indexed(0, 3);
        let first = learner.update(&m, &cfg, &mut rng).unwrap().unwrap();
        let mut last = first;
        for _ in 0..300 {
            let loss = learner.update(&m, &cfg, &mut rng).unwrap().unwrap();
            assert!(loss <= last);
            last = loss;
        }
        assert!(last < first, "loss {first} -> {last}");
    }
}
