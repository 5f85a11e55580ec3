use serde::{Deserialize, Serialize};

use super::{select_action, Learner, RawStep, SlidingWindow, TrainConfig};
use crate::geometry::Vec3;
use crate::mdp::{step, terminal_bookkeeping, EpisodeLog, NavModel, RadioSource, StepOutcome, TerminalClass};
use crate::neural::{pretrain_distance_init, DuelingNet, PretrainConfig, PretrainReport};
use crate::rngs::{self, SimRng, Stream};
use crate::Result;

/// Extra work interleaved with real experience (model learning and
/// planning). The default hooks do nothing.
pub trait Planner {
    fn after_real_step(
        &mut self,
        _learner: &mut Learner,
        _model: &NavModel,
        _cfg: &TrainConfig,
        _episode: usize,
        _outcome: &StepOutcome,
    ) -> Result<()> {
        Ok(())
    }

    fn after_episode(&mut self, _learner: &Learner, _model: &NavModel, _episode: usize) -> Result<()> {
        Ok(())
    }
}

/// Plain direct reinforcement learning.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPlanning;

impl Planner for NoPlanning {}

/// Everything needed to continue a training run exactly where it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingState {
    pub learner: Learner,
    pub agent_rng: SimRng,
    pub fading_rng: SimRng,
    pub next_episode: usize,
    pub logs: Vec<EpisodeLog>,
    pub pretrain: Option<PretrainReport>,
}

impl TrainingState {
    /// Fresh network from the run seed, distance-initialized when enabled.
    pub fn new(model: &NavModel, cfg: &TrainConfig, pretrain: &PretrainConfig, seed: u64) -> Result<Self> {
        let mut online = DuelingNet::new(3, &cfg.hidden, model.n_actions(), &mut rngs::stream(seed, Stream::Init))?;
        let report = if cfg.distance_init {
            Some(pretrain_distance_init(&mut online, model, pretrain, &mut rngs::stream(seed, Stream::Pretrain))?)
        } else {
            None
        };
        Ok(Self::from_network(online, cfg, seed, report))
    }

    pub fn from_network(online: DuelingNet<f64>, cfg: &TrainConfig, seed: u64, pretrain: Option<PretrainReport>) -> Self {
        Self {
            learner: Learner::new(online, cfg),
            agent_rng: rngs::stream(seed, Stream::Agent),
            fading_rng: rngs::stream(seed, Stream::Fading),
            next_episode: 0,
            logs: Vec::new(),
            pretrain,
        }
    }

    /// Runs episodes until `until_episode` episodes have completed overall.
    pub fn run<S, P>(
        &mut self,
        model: &NavModel,
        radio: &S,
        cfg: &TrainConfig,
        planner: &mut P,
        until_episode: usize,
    ) -> Result<()>
    where
        S: RadioSource + ?Sized,
        P: Planner + ?Sized,
    {
        let mut window = SlidingWindow::new(cfg.n_step, cfg.gamma);
        while self.next_episode < until_episode {
            let episode = self.next_episode;
            window.clear();
            let start = model.random_start(&mut self.agent_rng);
            let mut q = start;
            let mut log = EpisodeLog {
                episode,
                start,
                positions: Vec::new(),
                rewards: Vec::new(),
                return_value: 0.0,
                terminal_class: TerminalClass::None,
            };
            for n in 1..=model.max_steps {
                let l = &mut self.learner;
                let action = select_action(&l.online, model, q, l.epsilon.current, &mut self.agent_rng);
                let outcome = step(model, radio, q, action, n, &mut self.fading_rng)?;
                let raw = RawStep {
                    state: q,
                    action,
                    reward: outcome.reward,
                    next_state: outcome.next_state,
                    terminal_class: outcome.terminal_class,
                };
                if let Some(t) = window.push(raw) {
                    l.replay.push(t);
                }
                if outcome.terminal_class.is_terminal() {
                    for t in window.flush() {
                        l.replay.push(t);
                    }
                }
                l.update(model, cfg, &mut self.agent_rng)?;
                l.epsilon.advance();
                planner.after_real_step(l, model, cfg, episode, &outcome)?;

                log.positions.push(outcome.next_state);
                log.rewards.push(outcome.reward);
                q = outcome.next_state;
                if outcome.terminal_class.is_terminal() {
                    log.terminal_class = outcome.terminal_class;
                    break;
                }
            }
            log.return_value = log.rewards.iter().sum::<f64>() + terminal_bookkeeping(model, log.terminal_class);
            self.logs.push(log);
            if (episode + 1) % cfg.target_sync_episodes == 0 {
                self.learner.sync_target();
            }
            planner.after_episode(&self.learner, model, episode)?;
            self.next_episode += 1;
        }
        Ok(())
    }
}

/// Direct reinforcement learning over `cfg.episodes` episodes.
pub fn train_direct<S: RadioSource + ?Sized>(
    model: &NavModel,
    radio: &S,
    cfg: &TrainConfig,
    pretrain: &PretrainConfig,
    seed: u64,
) -> Result<(DuelingNet<f64>, Vec<EpisodeLog>)> {
    let mut state = TrainingState::new(model, cfg, pretrain, seed)?;
    state.run(model, radio, cfg, &mut NoPlanning, cfg.episodes)?;
    Ok((state.learner.online, state.logs))
}

/// Deterministic greedy path, without measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub start: Vec3,
    pub positions: Vec<Vec3>,
    pub terminal_class: TerminalClass,
}

pub fn greedy_rollout(net: &DuelingNet<f64>, model: &NavModel, start: Vec3) -> Rollout {
    let mut positions = Vec::new();
    let mut q = start;
    let mut terminal_class = if q.dist(model.destination) <= model.snap_radius() {
        TerminalClass::Destination
    } else {
        TerminalClass::None
    };
    let mut n = 0;
    while !terminal_class.is_terminal() {
        n += 1;
        let a = super::greedy_action(net, model, q);
        q = model.transition(q, a).expect("greedy action is in range");
        positions.push(q);
        terminal_class = model.classify_terminal(q, n);
    }
    Rollout { start, positions, terminal_class }
}
