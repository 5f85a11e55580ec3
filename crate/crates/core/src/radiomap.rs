//! Learned radio map: a neural field predicting the best-association outage
//! probability anywhere in the airspace, fitted online from measurements.

use std::collections::VecDeque;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Bounds, Vec3};
use crate::neural::{Activation, AdamState, LayerSpec, Mlp};
use crate::radio::CoverageGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioMapConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub db_capacity: usize,
    /// One minibatch fit per real step when set.
    pub fit: bool,
    /// Map-error evaluation period in episodes (0 disables).
    pub eval_every: usize,
    /// Randomly chosen grid locations used for the error curve (0 = all).
    pub eval_points: usize,
    /// Learned-map grid export period in episodes (0 disables).
    pub export_every: usize,
}

impl Default for RadioMapConfig {
    fn default() -> Self {
        Self {
            hidden: vec![512, 256, 128, 64, 32],
            learning_rate: 1e-3,
            batch_size: 32,
            db_capacity: 100_000,
            fit: true,
            eval_every: 50,
            eval_points: 2000,
            export_every: 1000,
        }
    }
}

/// Anything that can predict the outage probability at a location.
pub trait OutagePredictor {
    fn predict(&self, q: Vec3) -> f64;
}

impl OutagePredictor for CoverageGrid {
    fn predict(&self, q: Vec3) -> f64 {
        self.outage_at(q.x, q.y)
    }
}

/// Fully connected relu net with a sigmoid output; inputs are positions
/// scaled to the unit cube by the airspace bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioMapNet {
    pub mlp: Mlp<f64>,
    pub bounds: Bounds,
}

pub fn radiomap_specs(hidden: &[usize]) -> Vec<LayerSpec> {
    let mut specs = Vec::with_capacity(hidden.len() + 1);
    let mut prev = 3;
    for &h in hidden {
        specs.push(LayerSpec { input_dim: prev, output_dim: h, activation: Activation::Relu });
        prev = h;
    }
    specs.push(LayerSpec { input_dim: prev, output_dim: 1, activation: Activation::Sigmoid });
    specs
}

impl RadioMapNet {
    pub fn new<R: Rng + ?Sized>(hidden: &[usize], bounds: Bounds, rng: &mut R) -> Result<Self> {
        Ok(Self { mlp: Mlp::new(&radiomap_specs(hidden), rng)?, bounds })
    }

    fn inputs(&self, qs: &[Vec3]) -> Array2<f64> {
        let mut x = Array2::zeros((qs.len(), 3));
        for (i, &q) in qs.iter().enumerate() {
            for (c, v) in self.bounds.normalize(q).into_iter().enumerate() {
                x[[i, c]] = v;
            }
        }
        x
    }

    pub fn predict_many(&self, qs: &[Vec3]) -> Vec<f64> {
        self.mlp.forward(self.inputs(qs).view()).into_raw_vec_and_offset().0
    }

    /// Coverage map (`1 - outage`) on the same grid schema as the oracle.
    pub fn export_grid(&self, altitude: f64, pitch: f64) -> Result<CoverageGrid> {
        CoverageGrid::from_fn(&self.bounds, altitude, pitch, |q, _| Ok(1.0 - self.predict(q)))
    }
}

impl OutagePredictor for RadioMapNet {
    fn predict(&self, q: Vec3) -> f64 {
        self.predict_many(&[q])[0]
    }
}

/// Bounded FIFO of `(location, measured outage)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDb {
    capacity: usize,
    items: VecDeque<(Vec3, f64)>,
}

impl MeasurementDb {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "measurement capacity must be positive");
        Self { capacity, items: VecDeque::new() }
    }

    pub fn record(&mut self, location: Vec3, p_hat: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p_hat) {
            return Err(Error::ProbabilityOutOfRange(p_hat));
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back((location, p_hat));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Vec3, f64)> {
        self.items.iter()
    }
}

/// One Adam step on the mean squared error over a uniform minibatch.
/// Returns the minibatch loss before the step.
pub fn fit_minibatch<R: Rng + ?Sized>(
    net: &mut RadioMapNet,
    db: &MeasurementDb,
    batch_size: usize,
    opt: &mut AdamState<f64>,
    rng: &mut R,
) -> Result<f64> {
    assert!(batch_size > 0, "minibatch must not be empty");
    assert!(!db.is_empty(), "cannot fit on an empty measurement database");
    let picks: Vec<(Vec3, f64)> = (0..batch_size).map(|_| db.items[rng.random_range(0..db.len())]).collect();
    let qs: Vec<Vec3> = picks.iter().map(|p| p.0).collect();
    let x = net.inputs(&qs);
    let cache = net.mlp.forward_cached(x.view());
    let out = cache.output();
    let mut d_out = Array2::zeros(out.dim());
    let mut loss = 0.0;
    for (i, &(_, target)) in picks.iter().enumerate() {
        let err = out[[i, 0]] - target;
        loss += err * err;
        d_out[[i, 0]] = 2.0 * err / batch_size as f64;
    }
    let grads = net.mlp.backward(&cache, d_out);
    opt.step(&mut net.mlp, &grads)?;
    Ok(loss / batch_size as f64)
}

/// Mean squared and mean absolute outage error against a reference
/// coverage grid, over `indices` (all points when `None`).
pub fn map_error<P: OutagePredictor + ?Sized>(pred: &P, truth: &CoverageGrid, indices: Option<&[usize]>) -> (f64, f64) {
    let all: Vec<usize>;
    let idx = match indices {
        Some(i) => i,
        None => {
            all = (0..truth.len()).collect();
            &all
        }
    };
    if idx.is_empty() {
        return (0.0, 0.0);
    }
    let (mut se, mut ae) = (0.0, 0.0);
    for &i in idx {
        let e = pred.predict(truth.point(i)) - (1.0 - truth.coverage[i]);
        se += e * e;
        ae += e.abs();
    }
    let n = idx.len() as f64;
    (se / n, ae / n)
}

/// Batched variant of [`map_error`] for the neural map.
pub fn map_error_net(net: &RadioMapNet, truth: &CoverageGrid, indices: &[usize]) -> (f64, f64) {
    let qs: Vec<Vec3> = indices.iter().map(|&i| truth.point(i)).collect();
    if qs.is_empty() {
        return (0.0, 0.0);
    }
    let pred = net.predict_many(&qs);
    let (mut se, mut ae) = (0.0, 0.0);
    for (&i, p) in indices.iter().zip(pred) {
        let e = p - (1.0 - truth.coverage[i]);
        se += e * e;
        ae += e.abs();
    }
    let n = qs.len() as f64;
    (se / n, ae / n)
}
