//! Distance-based initialization: regress every action value onto minus
//! the distance from the post-action position to the destination. Needs no
//! interaction with the radio environment.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::dueling::DuelingNet;
use crate::geometry::Vec3;
use crate::mdp::NavModel;
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PretrainConfig {
    pub batch_size: usize,
    pub max_iterations: usize,
    pub learning_rate: f64,
    pub validation_samples: usize,
    pub check_every: usize,
    /// Stop once the validation mean squared error (m^2) drops below this.
    pub tolerance_mse: f64,
    /// Share of samples drawn near the destination, where the distance
    /// surface has its kink and greedy decisions are most fragile.
    pub near_fraction: f64,
    pub near_radius: f64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            max_iterations: 40_000,
            learning_rate: 1e-3,
            validation_samples: 1000,
            check_every: 500,
            tolerance_mse: 1.0,
            near_fraction: 0.5,
            near_radius: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PretrainReport {
    pub iterations: usize,
    pub validation_mse: f64,
}

/// `-|q + step * v_k - q_F|` for every action `k`.
pub fn distance_targets(model: &NavModel, q: Vec3) -> Vec<f64> {
    model.actions.iter().map(|&v| -(q + v * model.step_m).dist(model.destination)).collect()
}

fn sample_state<R: Rng + ?Sized>(model: &NavModel, cfg: &PretrainConfig, rng: &mut R) -> Vec3 {
    let b = &model.bounds;
    let (mut lo, mut hi) = (b.lower, b.upper);
    if rng.random::<f64>() < cfg.near_fraction {
        let r = cfg.near_radius;
        let d = model.destination;
        lo = Vec3::new((d.x - r).max(lo.x), (d.y - r).max(lo.y), lo.z);
        hi = Vec3::new((d.x + r).min(hi.x), (d.y + r).min(hi.y), hi.z);
    }
    Vec3::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y), model.altitude)
}

fn batch<T: Scalar>(model: &NavModel, states: &[Vec3]) -> (Array2<T>, Array2<T>) {
    let k = model.n_actions();
    let mut x = Array2::zeros((states.len(), 3));
    let mut y = Array2::zeros((states.len(), k));
    for (i, &q) in states.iter().enumerate() {
        for (c, v) in model.normalize(q).into_iter().enumerate() {
            x[[i, c]] = T::of(v);
        }
        for (c, v) in distance_targets(model, q).into_iter().enumerate() {
            y[[i, c]] = T::of(v);
        }
    }
    (x, y)
}

fn mse<T: Scalar>(net: &DuelingNet<T>, x: &Array2<T>, y: &Array2<T>) -> f64 {
    let q = net.forward(x.view());
    (&q - y).mapv(|d| (d * d).as_f64()).mean().unwrap_or(0.0)
}

pub fn pretrain_distance_init<T: Scalar, R: Rng + ?Sized>(
    net: &mut DuelingNet<T>,
    model: &NavModel,
    cfg: &PretrainConfig,
    rng: &mut R,
) -> Result<PretrainReport> {
    let val_states: Vec<Vec3> = (0..cfg.validation_samples).map(|_| sample_state(model, cfg, rng)).collect();
    let (vx, vy) = batch::<T>(model, &val_states);
    let mut opt = AdamState::<T>::new(net.num_params(), cfg.learning_rate);
    let mut val = mse(net, &vx, &vy);
    let scale = T::of(2.0 / (cfg.batch_size * model.n_actions()) as f64);
    for it in 1..=cfg.max_iterations {
        let states: Vec<Vec3> = (0..cfg.batch_size).map(|_| sample_state(model, cfg, rng)).collect();
        let (x, y) = batch::<T>(model, &states);
        let (q, cache) = net.forward_cached(x.view());
        let d_q = (&q - &y).mapv(|d| d * scale);
        let grads = net.backward(&cache, &d_q);
        opt.step(&mut net.body, &grads)?;
        if it % cfg.check_every == 0 || it == cfg.max_iterations {
            val = mse(net, &vx, &vy);
            if val < cfg.tolerance_mse {
                return Ok(PretrainReport { iterations: it, validation_mse: val });
            }
        }
    }
    Err(Error::NonConvergence { mse: val, iterations: cfg.max_iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::NavParams;

    #[test]
    fn targets_nonpositive_and_point_home() {
        let m = NavModel::new(&NavParams::default()).unwrap();
        let q = m.destination - Vec3::new(m.step_m, 0.0, 0.0);
        let t = distance_targets(&m, q);
        assert_eq!(t[0], 0.0);
        assert_eq!(crate::neural::argmax(&t), 0);
        let mut rng = crate::rngs::indexed(0, 0);
        for _ in 0..1000 {
            assert!(distance_targets(&m, sample_state(&m, &PretrainConfig::default(), &mut rng)).iter().all(|&v| v <= 0.0));
        }
    }

    #[test]
    fn reports_non_convergence() {
        let m = NavModel::new(&NavParams::default()).unwrap();
        let mut rng = crate::rngs::indexed(0, 1);
        let mut net: DuelingNet<f64> = DuelingNet::new(3, &[4], 4, &mut rng).unwrap();
        let cfg = PretrainConfig { max_iterations: 20, check_every: 10, tolerance_mse: 1e-9, ..Default::default() };
        let err = pretrain_distance_init(&mut net, &m, &cfg, &mut rng).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 20, .. }));
    }
}
