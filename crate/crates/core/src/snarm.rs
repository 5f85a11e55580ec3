//! Dyna-style planning on a learned radio map: every real step feeds the
//! measurement database and one map fit, then drives a number of simulated
//! steps whose rewards come from the map instead of the radio channel.
//! Simulated transitions go through the same replay and update path as
//! real ones.

use serde::{Deserialize, Serialize};

use crate::agent::{select_action, Learner, Planner, SlidingWindow, TrainConfig, TrainingState, Transition, RawStep};
use crate::geometry::Vec3;
use crate::mdp::{EpisodeLog, NavModel, RadioSource, StepOutcome, TerminalClass};
use crate::neural::{AdamState, DuelingNet, PretrainConfig};
use crate::radio::CoverageGrid;
use crate::radiomap::{fit_minibatch, map_error_net, MeasurementDb, OutagePredictor, RadioMapConfig, RadioMapNet};
use crate::rngs::{self, SimRng, Stream};
use crate::Result;

/// Simulated steps per real step as a function of the 1-based episode
/// number: `min(floor(n / period), cap)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanningSchedule {
    pub period: usize,
    pub cap: usize,
}

impl Default for PlanningSchedule {
    fn default() -> Self {
        Self { period: 100, cap: 10 }
    }
}

impl PlanningSchedule {
    pub fn disabled() -> Self {
        Self { period: 1, cap: 0 }
    }

    pub fn steps(&self, episode_number: usize) -> usize {
        if self.period == 0 {
            return 0;
        }
        (episode_number / self.period).min(self.cap)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnarmConfig {
    pub planning: PlanningSchedule,
    pub radiomap: RadioMapConfig,
}

/// Simulated trajectory position and step counter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub q: Vec3,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStepRecord {
    pub state: Vec3,
    pub action: usize,
    pub next_state: Vec3,
    pub reward: f64,
    pub terminal_class: TerminalClass,
    /// Transitions handed to the replay by this step.
    pub emitted: Vec<Transition>,
}

/// Advances the simulated trajectory by one step using the current policy
/// and the predicted outage, resetting it to a fresh random start when the
/// step ends the simulated episode.
pub fn simulated_step<P: OutagePredictor + ?Sized>(
    sim: SimState,
    window: &mut SlidingWindow,
    online: &DuelingNet<f64>,
    epsilon: f64,
    map: &P,
    model: &NavModel,
    rng: &mut SimRng,
) -> Result<(SimStepRecord, SimState)> {
    let action = select_action(online, model, sim.q, epsilon, rng);
    let next = model.transition(sim.q, action)?;
    let n = sim.n + 1;
    let class = model.classify_terminal(next, n);
    let reward = if class == TerminalClass::Outbound { 0.0 } else { model.reward(map.predict(next)) };
    let mut emitted: Vec<Transition> = window
        .push(RawStep { state: sim.q, action, reward, next_state: next, terminal_class: class })
        .into_iter()
        .collect();
    let after = if class.is_terminal() {
        emitted.extend(window.flush());
        SimState { q: model.random_start(rng), n: 0 }
    } else {
        SimState { q: next, n }
    };
    let record = SimStepRecord { state: sim.q, action, next_state: next, reward, terminal_class: class, emitted };
    Ok((record, after))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapErrorRow {
    /// Episodes completed when the error was measured.
    pub episode: usize,
    pub mse: f64,
    pub mae: f64,
}

pub fn map_error_csv(rows: &[MapErrorRow]) -> String {
    let mut s = String::from("episode,mse,mae\n");
    for r in rows {
        s.push_str(&format!("{},{:.6},{:.6}\n", r.episode, r.mse, r.mae));
    }
    s
}

/// Radio-map learning and planning state carried across episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynaState {
    pub map: RadioMapNet,
    pub map_opt: AdamState<f64>,
    pub db: MeasurementDb,
    pub sim: SimState,
    pub sim_window: SlidingWindow,
    pub sim_rng: SimRng,
    pub map_rng: SimRng,
    pub map_errors: Vec<MapErrorRow>,
    pub simulated_steps: u64,
}

impl DynaState {
    pub fn new(model: &NavModel, train: &TrainConfig, cfg: &SnarmConfig, seed: u64, map: Option<RadioMapNet>) -> Result<Self> {
        let map = match map {
            Some(m) => m,
            None => RadioMapNet::new(&cfg.radiomap.hidden, model.bounds, &mut rngs::stream(seed, Stream::RadioMapInit))?,
        };
        let mut sim_rng = rngs::stream(seed, Stream::Planning);
        let sim = SimState { q: model.random_start(&mut sim_rng), n: 0 };
        Ok(Self {
            map_opt: AdamState::new(map.mlp.num_params(), cfg.radiomap.learning_rate),
            map,
            db: MeasurementDb::new(cfg.radiomap.db_capacity),
            sim,
            sim_window: SlidingWindow::new(train.n_step, train.gamma),
            sim_rng,
            map_rng: rngs::stream(seed, Stream::RadioMap),
            map_errors: Vec::new(),
            simulated_steps: 0,
        })
    }
}

/// Fixed evaluation locations for the map-error curve.
#[derive(Debug, Clone)]
pub struct MapEval<'a> {
    pub truth: &'a CoverageGrid,
    pub indices: Vec<usize>,
}

impl<'a> MapEval<'a> {
    pub fn new(truth: &'a CoverageGrid, points: usize, seed: u64) -> Self {
        use rand::seq::index::sample;
        let n = truth.len();
        let indices = if points == 0 || points >= n {
            (0..n).collect()
        } else {
            let mut rng = rngs::indexed(seed, u64::MAX);
            let mut v = sample(&mut rng, n, points).into_vec();
            v.sort_unstable();
            v
        };
        Self { truth, indices }
    }
}

/// [`Planner`] implementing the map-learning and planning half of the loop.
pub struct DynaPlanner<'a> {
    pub state: DynaState,
    pub cfg: SnarmConfig,
    pub eval: Option<MapEval<'a>>,
    /// Called with the learned map every `export_every` episodes.
    pub on_export: Option<Box<dyn FnMut(usize, &RadioMapNet) -> Result<()> + 'a>>,
}

impl DynaPlanner<'_> {
    pub fn record_map_error(&mut self, episodes_done: usize) {
        if let Some(ev) = &self.eval {
            let (mse, mae) = map_error_net(&self.state.map, ev.truth, &ev.indices);
            self.state.map_errors.push(MapErrorRow { episode: episodes_done, mse, mae });
        }
    }
}

impl Planner for DynaPlanner<'_> {
    fn after_real_step(
        &mut self,
        learner: &mut Learner,
        model: &NavModel,
        cfg: &TrainConfig,
        episode: usize,
        outcome: &StepOutcome,
    ) -> Result<()> {
        let st = &mut self.state;
        if let Some(m) = &outcome.measurement {
            st.db.record(m.location, m.best_outage)?;
        }
        if self.cfg.radiomap.fit && !st.db.is_empty() {
            fit_minibatch(&mut st.map, &st.db, self.cfg.radiomap.batch_size, &mut st.map_opt, &mut st.map_rng)?;
        }
        for _ in 0..self.cfg.planning.steps(episode + 1) {
            let (rec, next) = simulated_step(
                st.sim,
                &mut st.sim_window,
                &learner.online,
                learner.epsilon.current,
                &st.map,
                model,
                &mut st.sim_rng,
            )?;
            for t in rec.emitted {
                learner.replay.push(t);
            }
            st.sim = next;
            st.simulated_steps += 1;
            learner.update(model, cfg, &mut st.sim_rng)?;
        }
        Ok(())
    }

    fn after_episode(&mut self, _learner: &Learner, _model: &NavModel, episode: usize) -> Result<()> {
        let done = episode + 1;
        let every = self.cfg.radiomap.eval_every;
        if every > 0 && done % every == 0 {
            self.record_map_error(done);
        }
        let export = self.cfg.radiomap.export_every;
        if export > 0 && done % export == 0 {
            if let Some(cb) = self.on_export.as_mut() {
                cb(done, &self.state.map)?;
            }
        }
        Ok(())
    }
}

pub struct SnarmOutcome {
    pub online: DuelingNet<f64>,
    pub map: RadioMapNet,
    pub logs: Vec<EpisodeLog>,
    pub map_errors: Vec<MapErrorRow>,
}

/// Full Dyna training run from a fresh (distance-initialized) network.
pub fn train_snarm<S: RadioSource + ?Sized>(
    model: &NavModel,
    radio: &S,
    train: &TrainConfig,
    cfg: &SnarmConfig,
    pretrain: &PretrainConfig,
    seed: u64,
    truth: Option<&CoverageGrid>,
) -> Result<SnarmOutcome> {
    let mut state = TrainingState::new(model, train, pretrain, seed)?;
    let mut planner = DynaPlanner {
        state: DynaState::new(model, train, cfg, seed, None)?,
        cfg: cfg.clone(),
        eval: truth.map(|t| MapEval::new(t, cfg.radiomap.eval_points, seed)),
        on_export: None,
    };
    planner.record_map_error(0);
    state.run(model, radio, train, &mut planner, train.episodes)?;
    Ok(SnarmOutcome {
        online: state.learner.online,
        map: planner.state.map,
        logs: state.logs,
        map_errors: planner.state.map_errors,
    })
}
