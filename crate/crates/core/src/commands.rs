//! Subcommand implementations behind the `snarm` binary. Each command reads
//! its inputs from disk, writes its artifacts, and returns a one-line
//! summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::{greedy_rollout, NoPlanning, TrainingState};
use crate::citygen::EnvRealization;
use crate::config::RunConfig;
use crate::geometry::Vec3;
use crate::mdp::{episodes_csv, returns_csv, terminal_bookkeeping, CellularRadio, NavModel, TerminalClass};
use crate::neural::{load_mlp, save_mlp, DuelingNet};
use crate::radio::{outage_oracle_grid, CoverageGrid};
use crate::radiomap::{OutagePredictor, RadioMapNet};
use crate::rngs;
use crate::snarm::{map_error_csv, DynaPlanner, DynaState, MapEval};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Direct,
    Snarm,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Mode::Direct),
            "snarm" => Ok(Mode::Snarm),
            other => Err(Error::InvalidMode(other.to_string())),
        }
    }
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Snarm => "snarm",
        }
    }
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    serde_json::from_str(&std::fs::read_to_string(path)?)
        .map_err(|e| Error::Malformed { path: path.to_path_buf(), msg: e.to_string() })
}

pub fn gen_env(cfg: &RunConfig, out: &Path) -> Result<String> {
    let env = cfg.realize_env()?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    env.save(out)?;
    Ok(format!("env: {} cells, {} buildings -> {}", env.num_cells(), env.buildings.len(), out.display()))
}

pub fn oracle_grid(cfg: &RunConfig, env: &EnvRealization) -> Result<CoverageGrid> {
    outage_oracle_grid(env, &cfg.radio, cfg.navigation.altitude, cfg.oracle.pitch, cfg.oracle.samples, cfg.oracle.seed)
}

pub fn oracle(cfg: &RunConfig, env_path: &Path, out: &Path) -> Result<String> {
    let env = EnvRealization::load(env_path)?;
    let grid = oracle_grid(cfg, &env)?;
    write_text(out, &grid.to_csv())?;
    Ok(format!("oracle: {}x{} grid -> {}", grid.nx, grid.ny, out.display()))
}

/// Identity and provenance of a training run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub mode: Mode,
    pub seed: u64,
    pub config_hash: String,
    pub env_seed: u64,
    pub episodes_completed: usize,
    pub pretrain: Option<crate::neural::PretrainReport>,
    pub simulated_steps: u64,
    pub config: RunConfig,
}

/// Everything needed to resume a run at an episode boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunState {
    pub mode: Mode,
    pub config_hash: String,
    pub training: TrainingState,
    pub dyna: Option<DynaState>,
}

pub struct TrainRequest<'a> {
    pub cfg: &'a RunConfig,
    pub env: &'a EnvRealization,
    pub mode: Mode,
    pub out: &'a Path,
    pub resume: bool,
    /// Reference coverage for the map-error curve; computed from the oracle
    /// settings when absent.
    pub truth: Option<&'a CoverageGrid>,
    /// Stop (with a checkpoint) after this many completed episodes.
    pub stop_after: Option<usize>,
}

fn state_path(out: &Path) -> PathBuf {
    out.join("checkpoints").join("state.json")
}

pub fn train(req: TrainRequest<'_>) -> Result<String> {
    let cfg = req.cfg;
    let model = cfg.nav_model()?;
    let radio = CellularRadio { env: req.env.clone(), params: cfg.radio };
    let hash = cfg.hash()?;
    let snarm_cfg = cfg.snarm();

    let (mut training, mut dyna) = if req.resume {
        let st: RunState = read_json(&state_path(req.out))?;
        if st.config_hash != hash {
            return Err(Error::InvalidConfig("resume requested with a different configuration".into()));
        }
        if st.mode != req.mode {
            return Err(Error::InvalidMode(req.mode.as_str().into()));
        }
        (st.training, st.dyna)
    } else {
        let training = TrainingState::new(&model, &cfg.training, &cfg.pretrain, cfg.seed)?;
        let dyna = match req.mode {
            Mode::Direct => None,
            Mode::Snarm => Some(DynaState::new(&model, &cfg.training, &snarm_cfg, cfg.seed, None)?),
        };
        (training, dyna)
    };

    std::fs::create_dir_all(req.out.join("checkpoints"))?;
    let owned_truth;
    let truth = match (req.mode, req.truth) {
        (Mode::Snarm, Some(t)) => Some(t),
        (Mode::Snarm, None) => {
            owned_truth = oracle_grid(cfg, req.env)?;
            Some(&owned_truth)
        }
        (Mode::Direct, _) => None,
    };

    let target = cfg.training.episodes.min(req.stop_after.unwrap_or(usize::MAX));
    let every = cfg.output.checkpoint_every;
    while training.next_episode < target {
        let chunk_end = ((training.next_episode / every + 1) * every).min(target);
        match dyna.take() {
            None => training.run(&model, &radio, &cfg.training, &mut NoPlanning, chunk_end)?,
            Some(state) => {
                let maps_dir = req.out.join("maps");
                let altitude = cfg.navigation.altitude;
                let pitch = cfg.oracle.pitch;
                let mut planner = DynaPlanner {
                    state,
                    cfg: snarm_cfg.clone(),
                    eval: truth.map(|t| MapEval::new(t, cfg.radiomap.eval_points, cfg.seed)),
                    on_export: Some(Box::new(move |ep, net: &RadioMapNet| {
                        let grid = net.export_grid(altitude, pitch)?;
                        write_text(&maps_dir.join(format!("learned_{ep:05}.csv")), &grid.to_csv())
                    })),
                };
                if training.next_episode == 0 && planner.state.map_errors.is_empty() {
                    planner.record_map_error(0);
                }
                training.run(&model, &radio, &cfg.training, &mut planner, chunk_end)?;
                dyna = Some(planner.state);
            }
        }
        write_run_outputs(req.out, cfg, req.mode, &hash, &training, dyna.as_ref())?;
    }
    if training.next_episode == 0 {
        write_run_outputs(req.out, cfg, req.mode, &hash, &training, dyna.as_ref())?;
    }
    let last = training.logs.last().map(|l| l.return_value).unwrap_or(0.0);
    Ok(format!(
        "train[{}]: {} episodes, last return {:.2} -> {}",
        req.mode.as_str(),
        training.next_episode,
        last,
        req.out.display()
    ))
}

fn write_run_outputs(
    out: &Path,
    cfg: &RunConfig,
    mode: Mode,
    hash: &str,
    training: &TrainingState,
    dyna: Option<&DynaState>,
) -> Result<()> {
    let ck = out.join("checkpoints");
    let step = training.learner.updates;
    save_mlp(&ck.join("online"), "dueling", &training.learner.online.body, cfg.seed, step)?;
    save_mlp(&ck.join("target"), "dueling", &training.learner.target.body, cfg.seed, step)?;
    write_text(&out.join("returns.csv"), &returns_csv(&training.logs))?;
    write_text(&out.join("episodes.csv"), &episodes_csv(&training.logs))?;
    if let Some(d) = dyna {
        save_mlp(&ck.join("radiomap"), "radiomap", &d.map.mlp, cfg.seed, d.map_opt.step)?;
        write_text(&out.join("map_error.csv"), &map_error_csv(&d.map_errors))?;
        let grid = d.map.export_grid(cfg.navigation.altitude, cfg.oracle.pitch)?;
        write_text(&out.join("maps").join("learned_final.csv"), &grid.to_csv())?;
    }
    let manifest = RunManifest {
        mode,
        seed: cfg.seed,
        config_hash: hash.to_string(),
        env_seed: cfg.city.seed,
        episodes_completed: training.next_episode,
        pretrain: training.pretrain,
        simulated_steps: dyna.map(|d| d.simulated_steps).unwrap_or(0),
        config: cfg.clone(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    let state = RunState { mode, config_hash: hash.to_string(), training: training.clone(), dyna: dyna.cloned() };
    let tmp = ck.join("state.json.tmp");
    std::fs::write(&tmp, serde_json::to_vec(&state)?)?;
    std::fs::rename(&tmp, state_path(out))?;
    Ok(())
}

/// Dueling network from a checkpoint base path (`<base>.json` + `<base>.bin`).
pub fn load_dueling(base: &Path, n_actions: usize) -> Result<DuelingNet<f64>> {
    let (_, body) = load_mlp::<f64>(base)?;
    if body.output_dim() != n_actions + 1 {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint has {} outputs, expected {} actions plus the value head",
            body.output_dim(),
            n_actions
        )));
    }
    Ok(DuelingNet::from_body(body))
}

/// Starts file: CSV with header `x,y,z`.
pub fn load_starts(path: &Path) -> Result<Vec<Vec3>> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)?;
    let bad = |row: usize, msg: &str| Error::Malformed { path: path.to_path_buf(), msg: format!("row {row}: {msg}") };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(i + 1, &e.to_string()))?;
        if v.len() != 3 {
            return Err(bad(i + 1, "expected x,y,z"));
        }
        out.push(Vec3::new(v[0], v[1], v[2]));
    }
    Ok(out)
}

pub fn starts_csv(starts: &[Vec3]) -> String {
    let mut s = String::from("x,y,z\n");
    for q in starts {
        let _ = writeln!(s, "{:.3},{:.3},{:.3}", q.x, q.y, q.z);
    }
    s
}

pub fn random_starts(model: &NavModel, n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = rngs::indexed(seed, 1);
    (0..n).map(|_| model.random_start(&mut rng)).collect()
}

/// Points every `step_m` along the straight segment to the destination,
/// ending exactly on it.
pub fn straight_path(model: &NavModel, start: Vec3) -> Vec<Vec3> {
    let d = model.destination - start;
    let len = d.norm();
    if len <= model.snap_radius() {
        return Vec::new();
    }
    let n = (len / model.step_m).ceil() as usize;
    (1..=n).map(|k| start + d * (k as f64 / n as f64)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathScore {
    pub steps: usize,
    pub length_m: f64,
    pub outage_sum: f64,
    pub mean_outage: f64,
    /// Expected return under the reference outage, with terminal bookkeeping.
    pub expected_return: f64,
}

pub fn score_path<P: OutagePredictor + ?Sized>(
    model: &NavModel,
    truth: &P,
    start: Vec3,
    positions: &[Vec3],
    class: TerminalClass,
) -> PathScore {
    let mut prev = start;
    let mut length_m = 0.0;
    let mut outage_sum = 0.0;
    let mut rewards = 0.0;
    let mut counted = 0;
    for &q in positions {
        length_m += q.dist(prev);
        prev = q;
        if model.bounds.contains(q) {
            let p = truth.predict(q);
            outage_sum += p;
            rewards += model.reward(p);
            counted += 1;
        }
    }
    PathScore {
        steps: positions.len(),
        length_m,
        outage_sum,
        mean_outage: if counted > 0 { outage_sum / counted as f64 } else { 0.0 },
        expected_return: rewards + terminal_bookkeeping(model, class),
    }
}

pub const SUMMARY_CSV_HEADER: &str = "start_id,start_x,start_y,start_z,steps,terminal_class,length_m,outage_sum,mean_outage,expected_return,straight_steps,straight_length_m,straight_outage_sum,straight_mean_outage";
pub const TRAJECTORY_CSV_HEADER: &str = "start_id,step,x,y,z";

pub struct EvalResult {
    pub trajectories_csv: String,
    pub summary_csv: String,
    pub policy: Vec<PathScore>,
    pub straight: Vec<PathScore>,
}

pub fn evaluate(model: &NavModel, net: &DuelingNet<f64>, truth: &CoverageGrid, starts: &[Vec3]) -> EvalResult {
    let mut traj = format!("{TRAJECTORY_CSV_HEADER}\n");
    let mut summary = format!("{SUMMARY_CSV_HEADER}\n");
    let (mut policy, mut straight) = (Vec::new(), Vec::new());
    for (id, &start) in starts.iter().enumerate() {
        let r = greedy_rollout(net, model, start);
        let _ = writeln!(traj, "{id},0,{:.3},{:.3},{:.3}", start.x, start.y, start.z);
        for (n, q) in r.positions.iter().enumerate() {
            let _ = writeln!(traj, "{id},{},{:.3},{:.3},{:.3}", n + 1, q.x, q.y, q.z);
        }
        let ps = score_path(model, truth, start, &r.positions, r.terminal_class);
        let line = straight_path(model, start);
        let ss = score_path(model, truth, start, &line, TerminalClass::Destination);
        let _ = writeln!(
            summary,
            "{id},{:.3},{:.3},{:.3},{},{},{:.3},{:.6},{:.6},{:.6},{},{:.3},{:.6},{:.6}",
            start.x,
            start.y,
            start.z,
            ps.steps,
            r.terminal_class,
            ps.length_m,
            ps.outage_sum,
            ps.mean_outage,
            ps.expected_return,
            ss.steps,
            ss.length_m,
            ss.outage_sum,
            ss.mean_outage
        );
        policy.push(ps);
        straight.push(ss);
    }
    EvalResult { trajectories_csv: traj, summary_csv: summary, policy, straight }
}

pub struct EvalRequest<'a> {
    pub cfg: &'a RunConfig,
    pub env_path: &'a Path,
    pub checkpoint: &'a Path,
    pub starts: Option<&'a Path>,
    pub truth: Option<&'a Path>,
    pub out: &'a Path,
}

pub fn eval(req: EvalRequest<'_>) -> Result<String> {
    let cfg = req.cfg;
    let model = cfg.nav_model()?;
    let env = EnvRealization::load(req.env_path)?;
    let net = load_dueling(req.checkpoint, model.n_actions())?;
    let truth = match req.truth {
        Some(p) => CoverageGrid::load_csv(p, cfg.navigation.altitude)?,
        None => oracle_grid(cfg, &env)?,
    };
    let starts = match req.starts {
        Some(p) => load_starts(p)?,
        None => random_starts(&model, cfg.eval.starts, cfg.eval.seed),
    };
    let res = evaluate(&model, &net, &truth, &starts);
    std::fs::create_dir_all(req.out)?;
    write_text(&req.out.join("trajectories.csv"), &res.trajectories_csv)?;
    write_text(&req.out.join("summary.csv"), &res.summary_csv)?;
    let mean = |v: &[PathScore]| v.iter().map(|s| s.mean_outage).sum::<f64>() / v.len().max(1) as f64;
    Ok(format!(
        "eval: {} paths, mean outage {:.4} (straight line {:.4}) -> {}",
        starts.len(),
        mean(&res.policy),
        mean(&res.straight),
        req.out.display()
    ))
}

pub fn export_map(cfg: &RunConfig, checkpoint: &Path, out: &Path) -> Result<String> {
    let (_, mlp) = load_mlp::<f64>(checkpoint)?;
    let net = RadioMapNet { mlp, bounds: cfg.airspace()? };
    let grid = net.export_grid(cfg.navigation.altitude, cfg.oracle.pitch)?;
    write_text(out, &grid.to_csv())?;
    Ok(format!("export-map: {}x{} grid -> {}", grid.nx, grid.ny, out.display()))
}

/// Machine-readable failure line.
pub fn error_line(err: &Error) -> String {
    serde_json::json!({ "error": err.kind(), "message": err.to_string() }).to_string()
}
