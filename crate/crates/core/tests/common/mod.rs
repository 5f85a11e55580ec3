//! Oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use snarm::agent::greedy_rollout;
use snarm::config::RunConfig;
use snarm::mdp::{terminal_bookkeeping, NavModel, NavParams};
use snarm::neural::{DuelingNet, Mlp};
use snarm::radio::{antenna_gain_dbi, db_to_linear, outage_from_budget, path_loss_db, LinkBudget};
use snarm::radiomap::radiomap_specs;
use snarm::rngs::indexed;
use snarm::Vec3;

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-12)
}

/// Central differences of `loss` with respect to every flat parameter.
fn numeric_gradient(params: &[f64], mut loss: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-6;
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = loss(&p);
            p[i] = orig - h;
            let down = loss(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

/// Dueling net 3 -> 4 -> (1 + 4) with 41 parameters; loss is a random
/// linear functional of the Q outputs plus a squared term.
pub fn dueling_fd_error(seed: u64) -> f64 {
    let mut rng = indexed(seed, 100);
    let mut net: DuelingNet<f64> = DuelingNet::new(3, &[4], 4, &mut rng).unwrap();
    assert!(net.num_params() <= 50);
    // perturb biases away from zero so relu units sit off their kinks
    let p: Vec<f64> = net.body.params_flat().iter().map(|v| v + rng.random_range(-0.3..0.3)).collect();
    net.body.set_params_flat(&p).unwrap();
    let x = random_matrix(6, 3, &mut rng);
    let w = random_matrix(6, 4, &mut rng);
    let loss = |q: &Array2<f64>| (q * &w).sum() + 0.5 * q.mapv(|v| v * v).sum();
    let (q, cache) = net.forward_cached(x.view());
    let d_q = &w + &q;
    let analytic = net.backward(&cache, &d_q).flat();
    let numeric = numeric_gradient(&p, |params| {
        let mut n = net.clone();
        n.body.set_params_flat(params).unwrap();
        loss(&n.forward(x.view()))
    });
    relative_error(&analytic, &numeric)
}

/// Radio-map net 3 -> 4 -> 3 -> 1 (sigmoid) with 35 parameters under the
/// squared-error loss used in fitting.
pub fn radiomap_fd_error(seed: u64) -> f64 {
    let mut rng = indexed(seed, 200);
    let mut net: Mlp<f64> = Mlp::new(&radiomap_specs(&[4, 3]), &mut rng).unwrap();
    assert!(net.num_params() <= 50);
    let p: Vec<f64> = net.params_flat().iter().map(|v| v + rng.random_range(-0.3..0.3)).collect();
    net.set_params_flat(&p).unwrap();
    let x = Array2::from_shape_fn((8, 3), |_| rng.random_range(0.0..1.0));
    let y = Array2::from_shape_fn((8, 1), |_| rng.random_range(0.0..1.0));
    let loss = |out: &Array2<f64>| (out - &y).mapv(|d| d * d).sum();
    let cache = net.forward_cached(x.view());
    let d_out = (cache.output() - &y).mapv(|d| 2.0 * d);
    let analytic = net.backward(&cache, d_out).flat();
    let numeric = numeric_gradient(&p, |params| {
        let mut n = net.clone();
        n.set_params_flat(params).unwrap();
        loss(&n.forward(x.view()))
    });
    relative_error(&analytic, &numeric)
}

/// Exhaustive value iteration over the horizontal lattice of `model`, with
/// rewards from the deterministic outage field `p`. Returns the optimal
/// return from `start`, terminal bonus or penalty included.
pub fn lattice_optimum(model: &NavModel, p: &dyn Fn(Vec3) -> f64, start: Vec3) -> f64 {
    let pts = model.lattice_points();
    let index = |q: Vec3| pts.iter().position(|&x| x.dist(q) < 1e-6);
    let mut v = vec![0.0; pts.len()];
    for _ in 0..10_000 {
        let mut delta: f64 = 0.0;
        for (i, &q) in pts.iter().enumerate() {
            if q.dist(model.destination) <= model.snap_radius() {
                continue;
            }
            let best = (0..model.n_actions())
                .map(|a| action_value(model, p, &v, &index, q, a))
                .fold(f64::MIN, f64::max);
            delta = delta.max((best - v[i]).abs());
            v[i] = best;
        }
        if delta < 1e-9 {
            break;
        }
    }
    v[index(start).expect("start on the lattice")]
}

fn action_value(
    model: &NavModel,
    p: &dyn Fn(Vec3) -> f64,
    v: &[f64],
    index: &dyn Fn(Vec3) -> Option<usize>,
    q: Vec3,
    a: usize,
) -> f64 {
    let next = model.transition(q, a).unwrap();
    if !model.bounds.contains(next) {
        return -model.outbound_penalty;
    }
    let r = model.reward(p(next));
    if next.dist(model.destination) <= model.snap_radius() {
        return r + model.dest_reward;
    }
    r + v[index(next).expect("in-bounds lattice point")]
}

/// Return of the greedy path from `start` under expected rewards.
pub fn greedy_return(net: &DuelingNet<f64>, model: &NavModel, p: &dyn Fn(Vec3) -> f64, start: Vec3) -> f64 {
    let r = greedy_rollout(net, model, start);
    let steps: f64 = r.positions.iter().filter(|&&q| model.bounds.contains(q)).map(|&q| model.reward(p(q))).sum();
    steps + terminal_bookkeeping(model, r.terminal_class)
}

/// One checked quantity: what was measured, against what bound.
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool, detail: String) -> Self {
        Self { name: name.into(), ok, detail }
    }
}

/// Empirical serving-cell outage for Rayleigh links with the given mean
/// powers, against `P(SIR < g) = g m2 / (m1 + g m2)`.
pub fn two_cell_outage(m1: f64, m2: f64, gamma_db: f64, j: usize, seed: u64) -> (f64, f64) {
    let budget = LinkBudget { mean_power_mw: vec![m1, m2], los: vec![false, false] };
    let report = outage_from_budget(&budget, Vec3::default(), j, gamma_db, 15.0, &mut indexed(seed, 3));
    let g = db_to_linear(gamma_db);
    (report.per_assoc_outage[0], g * m2 / (m1 + g * m2))
}

pub fn channel_checks() -> Vec<Check> {
    let j = 100_000;
    let mut out = Vec::new();
    let (p, exact) = two_cell_outage(1.0, 1.0, 0.0, j, 1);
    let tol = 3.0 * (0.25 / j as f64).sqrt();
    out.push(Check::new("symmetric two-cell", (p - exact).abs() <= tol, format!("{p:.5} vs {exact} (tol {tol:.5})")));
    for (i, &(m1, m2, gdb)) in [(1.0, 0.25, 0.0), (2.0, 1.0, 3.0), (1.0, 4.0, -3.0), (10.0, 1.0, 6.0)].iter().enumerate() {
        let (p, exact) = two_cell_outage(m1, m2, gdb, j, 10 + i as u64);
        let se = (exact * (1.0 - exact) / j as f64).sqrt();
        out.push(Check::new(
            format!("m1={m1} m2={m2} gamma={gdb} dB"),
            (p - exact).abs() <= 3.0 * se,
            format!("{p:.5} vs {exact:.5} (3 SE {:.5})", 3.0 * se),
        ));
    }
    out
}

pub fn spot_value_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let nlos_expect = -17.5 + (46.0 - 14.0) * 3.0 + 20.0 * (40.0 * std::f64::consts::PI * 2.0 / 3.0f64).log10();
    for (name, d, h, los, expect) in [
        ("LoS 1000 m", 1000.0, 100.0, true, 28.0 + 66.0 + 20.0 * 2f64.log10()),
        ("LoS 100 m", 100.0, 100.0, true, 28.0 + 44.0 + 20.0 * 2f64.log10()),
        ("NLoS 1000 m at 100 m height", 1000.0, 100.0, false, nlos_expect),
    ] {
        let got = path_loss_db(d, h, los, 2.0).unwrap();
        out.push(Check::new(name, (got - expect).abs() < 0.01, format!("{got:.3} dB vs {expect:.3} dB")));
    }
    let az: f64 = 30.0;
    let dir = [az.to_radians().cos(), az.to_radians().sin(), -(10f64.to_radians().tan())];
    let peak = antenna_gain_dbi(az, 10.0, 8, dir);
    let expect = 8.0 + 10.0 * 8f64.log10();
    out.push(Check::new("boresight peak", (peak - 17.03).abs() < 0.01, format!("{peak:.4} dBi vs {expect:.4} dBi")));
    out
}

pub fn desk_config() -> RunConfig {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../desk.cfg");
    RunConfig::load(&path).expect("desk.cfg parses")
}

/// Share of held-out lattice states whose greedy action strictly reduces
/// the distance to the destination.
pub fn distance_decreasing_share(net: &DuelingNet<f64>, model: &NavModel, n: usize, seed: u64) -> f64 {
    let mut rng = indexed(seed, 2);
    let mut good = 0;
    for _ in 0..n {
        let q = model.random_start(&mut rng);
        let next = model.transition(q, snarm::agent::greedy_action(net, model, q)).unwrap();
        if next.dist(model.destination) < q.dist(model.destination) {
            good += 1;
        }
    }
    good as f64 / n as f64
}

/// 10 x 10 lattice with the destination in the far corner and a band of
/// poor coverage across the lower-left half; from the origin the good
/// paths go around the band.
pub fn pocket_toy() -> (NavModel, fn(Vec3) -> f64) {
    let model = NavModel::new(&NavParams {
        destination: [90.0, 90.0, 100.0],
        lower: [0.0, 0.0, 50.0],
        upper: [90.0, 90.0, 150.0],
        max_steps: 60,
        ..NavParams::default()
    })
    .unwrap();
    fn pocket(q: Vec3) -> f64 {
        if q.x <= 60.0 && (40.0..=50.0).contains(&q.y) {
            0.5
        } else {
            0.0
        }
    }
    (model, pocket)
}

/// Trailing moving average; entry `i` averages episodes `i + 1 - w ..= i`.
pub fn smoothed(values: &[f64], w: usize) -> Vec<f64> {
    values.windows(w).map(|s| s.iter().sum::<f64>() / w as f64).collect()
}

/// Episodes needed (counted from the start of training) before the
/// smoothed curve first reaches `level`.
pub fn episodes_to_reach(curve: &[f64], w: usize, level: f64) -> Option<usize> {
    curve.iter().position(|&v| v >= level).map(|i| i + w)
}
