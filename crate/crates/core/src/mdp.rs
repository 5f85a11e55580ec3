//! Coverage-aware navigation as an episodic decision process: the UAV moves
//! a fixed distance per step in one of `K` horizontal directions and pays a
//! unit flight cost plus a weighted outage penalty measured on arrival.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::citygen::EnvRealization;
use crate::geometry::{Bounds, Vec3};
use crate::radio::{empirical_outage, MeasurementReport, RadioParams};
use crate::rngs::SimRng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    dirs: Vec<Vec3>,
}

impl ActionSet {
    /// `K = 4` gives `+x, -x, +y, -y`; other `K` spread directions evenly
    /// starting from `+x`.
    pub fn horizontal(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("action set needs at least one direction".into()));
        }
        let dirs = if k == 4 {
            vec![
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(-1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, -1.0, 0.0),
            ]
        } else {
            (0..k)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                    Vec3::new(a.cos(), a.sin(), 0.0)
                })
                .collect()
        };
        Ok(Self { dirs })
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<Vec3> {
        self.dirs.get(index).copied().ok_or(Error::InvalidAction { index, k: self.dirs.len() })
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec3> {
        self.dirs.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalClass {
    None,
    Destination,
    Outbound,
    StepLimit,
}

impl TerminalClass {
    pub fn is_terminal(self) -> bool {
        self != TerminalClass::None
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TerminalClass::None => "none",
            TerminalClass::Destination => "destination",
            TerminalClass::Outbound => "outbound",
            TerminalClass::StepLimit => "step_limit",
        }
    }
}

impl fmt::Display for TerminalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TerminalClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => TerminalClass::None,
            "destination" => TerminalClass::Destination,
            "outbound" => TerminalClass::Outbound,
            "step_limit" => TerminalClass::StepLimit,
            other => return Err(Error::InvalidConfig(format!("unknown terminal class `{other}`"))),
        })
    }
}

/// Navigation settings as they appear in the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavParams {
    /// Displacement per step, meters.
    pub step_m: f64,
    pub altitude: f64,
    pub n_actions: usize,
    pub destination: [f64; 3],
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub max_steps: usize,
    pub outage_weight: f64,
    pub dest_reward: f64,
    pub outbound_penalty: f64,
}

impl Default for NavParams {
    fn default() -> Self {
        Self {
            step_m: 10.0,
            altitude: 100.0,
            n_actions: 4,
            destination: [1400.0, 1600.0, 100.0],
            lower: [0.0, 0.0, 0.0],
            upper: [2000.0, 2000.0, 300.0],
            max_steps: 200,
            outage_weight: 40.0,
            dest_reward: 200.0,
            outbound_penalty: 10000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavModel {
    pub bounds: Bounds,
    pub destination: Vec3,
    pub step_m: f64,
    pub altitude: f64,
    pub actions: ActionSet,
    pub max_steps: usize,
    pub outage_weight: f64,
    pub dest_reward: f64,
    pub outbound_penalty: f64,
}

impl NavModel {
    pub fn new(p: &NavParams) -> Result<Self> {
        let bounds = Bounds::new(p.lower.into(), p.upper.into())?;
        let destination = Vec3::from(p.destination);
        if !bounds.contains(destination) {
            return Err(Error::InvalidConfig("destination outside bounds".into()));
        }
        if !(p.step_m > 0.0) || p.max_steps == 0 {
            return Err(Error::InvalidConfig("step_m and max_steps must be positive".into()));
        }
        if (destination.z - p.altitude).abs() > 1e-9 {
            return Err(Error::InvalidConfig("destination must lie at the flight altitude".into()));
        }
        Ok(Self {
            bounds,
            destination,
            step_m: p.step_m,
            altitude: p.altitude,
            actions: ActionSet::horizontal(p.n_actions)?,
            max_steps: p.max_steps,
            outage_weight: p.outage_weight,
            dest_reward: p.dest_reward,
            outbound_penalty: p.outbound_penalty,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn transition(&self, q: Vec3, action: usize) -> Result<Vec3> {
        Ok(q + self.actions.get(action)? * self.step_m)
    }

    pub fn reward(&self, outage: f64) -> f64 {
        -1.0 - self.outage_weight * outage
    }

    /// Arrival radius around the destination.
    pub fn snap_radius(&self) -> f64 {
        self.step_m / 2.0
    }

    pub fn classify_terminal(&self, q_next: Vec3, step_count: usize) -> TerminalClass {
        if !self.bounds.contains(q_next) {
            TerminalClass::Outbound
        } else if q_next.dist(self.destination) <= self.snap_radius() {
            TerminalClass::Destination
        } else if step_count >= self.max_steps {
            TerminalClass::StepLimit
        } else {
            TerminalClass::None
        }
    }

    /// Nearest point of the step lattice anchored at the destination, at the
    /// flight altitude.
    pub fn snap_to_lattice(&self, q: Vec3) -> Vec3 {
        let s = self.step_m;
        let f = self.destination;
        Vec3::new(
            f.x + ((q.x - f.x) / s).round() * s,
            f.y + ((q.y - f.y) / s).round() * s,
            self.altitude,
        )
    }

    /// Integer offsets `(i, j)` such that `destination + (i, j) * step` is in bounds.
    fn lattice_ranges(&self) -> ((i64, i64), (i64, i64)) {
        let s = self.step_m;
        let f = self.destination;
        let lo = |l: f64, c: f64| -(((c - l) / s + 1e-9).floor() as i64);
        let hi = |u: f64, c: f64| ((u - c) / s + 1e-9).floor() as i64;
        (
            (lo(self.bounds.lower.x, f.x), hi(self.bounds.upper.x, f.x)),
            (lo(self.bounds.lower.y, f.y), hi(self.bounds.upper.y, f.y)),
        )
    }

    pub fn lattice_point(&self, i: i64, j: i64) -> Vec3 {
        Vec3::new(
            self.destination.x + i as f64 * self.step_m,
            self.destination.y + j as f64 * self.step_m,
            self.altitude,
        )
    }

    /// Every in-bounds lattice point, row-major by y then x.
    pub fn lattice_points(&self) -> Vec<Vec3> {
        let ((i0, i1), (j0, j1)) = self.lattice_ranges();
        (j0..=j1).flat_map(|j| (i0..=i1).map(move |i| (i, j))).map(|(i, j)| self.lattice_point(i, j)).collect()
    }

    /// Uniform in-bounds lattice point other than the destination.
    pub fn random_start<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        let ((i0, i1), (j0, j1)) = self.lattice_ranges();
        loop {
            let (i, j) = (rng.random_range(i0..=i1), rng.random_range(j0..=j1));
            if (i, j) != (0, 0) {
                return self.lattice_point(i, j);
            }
        }
    }

    /// Network input: position scaled to `[0, 1]^3` by the bounds.
    pub fn normalize(&self, q: Vec3) -> [f64; 3] {
        self.bounds.normalize(q)
    }
}

/// Anything that can report an outage measurement at a location.
pub trait RadioSource {
    fn measure(&self, q: Vec3, rng: &mut SimRng) -> Result<MeasurementReport>;
}

/// Measurements from the simulated cellular network.
#[derive(Debug, Clone)]
pub struct CellularRadio {
    pub env: EnvRealization,
    pub params: RadioParams,
}

impl RadioSource for CellularRadio {
    fn measure(&self, q: Vec3, rng: &mut SimRng) -> Result<MeasurementReport> {
        empirical_outage(&self.env, q, &self.params, rng)
    }
}

/// Deterministic outage field, for hand-built environments.
pub struct OutageField<F>(pub F);

impl<F: Fn(Vec3) -> f64> RadioSource for OutageField<F> {
    fn measure(&self, q: Vec3, _rng: &mut SimRng) -> Result<MeasurementReport> {
        Ok(MeasurementReport::from_per_assoc(q, vec![(self.0)(q).clamp(0.0, 1.0)]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: Vec3,
    pub reward: f64,
    pub terminal_class: TerminalClass,
    pub measurement: Option<MeasurementReport>,
}

/// Moves one step; `step_count` is the number of steps taken including this
/// one. Outbound moves are not measured and carry zero step reward.
pub fn step<S: RadioSource + ?Sized>(
    model: &NavModel,
    radio: &S,
    state: Vec3,
    action: usize,
    step_count: usize,
    rng: &mut SimRng,
) -> Result<StepOutcome> {
    let next_state = model.transition(state, action)?;
    let terminal_class = model.classify_terminal(next_state, step_count);
    if terminal_class == TerminalClass::Outbound {
        return Ok(StepOutcome { next_state, reward: 0.0, terminal_class, measurement: None });
    }
    let report = radio.measure(next_state, rng)?;
    Ok(StepOutcome {
        next_state,
        reward: model.reward(report.best_outage),
        terminal_class,
        measurement: Some(report),
    })
}

/// Terminal bonus or penalty booked on top of the step rewards.
pub fn terminal_bookkeeping(model: &NavModel, class: TerminalClass) -> f64 {
    match class {
        TerminalClass::Destination => model.dest_reward,
        TerminalClass::Outbound => -model.outbound_penalty,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub start: Vec3,
    /// Positions after each step.
    pub positions: Vec<Vec3>,
    pub rewards: Vec<f64>,
    /// Sum of step rewards plus the terminal bonus or penalty.
    pub return_value: f64,
    pub terminal_class: TerminalClass,
}

impl EpisodeLog {
    pub fn steps(&self) -> usize {
        self.rewards.len()
    }
}

pub const EPISODE_CSV_HEADER: &str = "episode,step,x,y,z,reward,terminal_class";
pub const RETURNS_CSV_HEADER: &str = "episode,return,steps,terminal_class";

/// Rows of the per-step trajectory table; row 0 is the start position.
pub fn episodes_csv(logs: &[EpisodeLog]) -> String {
    let mut s = String::new();
    s.push_str(EPISODE_CSV_HEADER);
    s.push('\n');
    for log in logs {
        let _ = writeln!(
            s,
            "{},0,{:.3},{:.3},{:.3},{:.6},none",
            log.episode, log.start.x, log.start.y, log.start.z, 0.0
        );
        for (n, (q, r)) in log.positions.iter().zip(&log.rewards).enumerate() {
            let class = if n + 1 == log.positions.len() { log.terminal_class } else { TerminalClass::None };
            let _ = writeln!(s, "{},{},{:.3},{:.3},{:.3},{:.6},{}", log.episode, n + 1, q.x, q.y, q.z, r, class);
        }
    }
    s
}

pub fn returns_csv(logs: &[EpisodeLog]) -> String {
    let mut s = String::new();
    s.push_str(RETURNS_CSV_HEADER);
    s.push('\n');
    for log in logs {
        let _ = writeln!(s, "{},{:.6},{},{}", log.episode, log.return_value, log.steps(), log.terminal_class);
    }
    s
}
