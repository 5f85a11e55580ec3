//! Dueling action-value network: a shared relu trunk ending in one
//! state-value unit and `K` advantage units, recombined as
//! `Q_k = V + A_k - mean(A)`.

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layer::{Activation, LayerSpec};
use super::mlp::{ForwardCache, Gradients, Mlp};
use crate::scalar::Scalar;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DuelingNet<T: Scalar> {
    /// Trunk plus the linear `K + 1` unit dueling layer (column 0 is `V`).
    pub body: Mlp<T>,
    pub n_actions: usize,
}

/// Layer specs for a trunk of relu layers followed by the dueling layer.
pub fn dueling_specs(input_dim: usize, hidden: &[usize], n_actions: usize) -> Vec<LayerSpec> {
    let mut specs = Vec::with_capacity(hidden.len() + 1);
    let mut prev = input_dim;
    for &h in hidden {
        specs.push(LayerSpec { input_dim: prev, output_dim: h, activation: Activation::Relu });
        prev = h;
    }
    specs.push(LayerSpec { input_dim: prev, output_dim: n_actions + 1, activation: Activation::Linear });
    specs
}

/// `Q = V + A - mean(A)` row by row; `head` is `(batch, K + 1)`.
pub fn aggregate<T: Scalar>(head: &Array2<T>) -> Array2<T> {
    let v = head.column(0);
    let adv = head.slice(s![.., 1..]);
    let mean = adv.mean_axis(Axis(1)).expect("at least one action");
    let mut q = adv.to_owned();
    for ((mut row, &vi), &mi) in q.rows_mut().into_iter().zip(v).zip(&mean) {
        row.mapv_inplace(|a| vi + a - mi);
    }
    q
}

/// Pulls `dL/dQ` back through the aggregation to `dL/d(head)`.
pub fn aggregate_backward<T: Scalar>(d_q: &Array2<T>) -> Array2<T> {
    let (b, k) = d_q.dim();
    let mut d_head = Array2::zeros((b, k + 1));
    let kk = T::of(k as f64);
    for (i, row) in d_q.rows().into_iter().enumerate() {
        let sum = row.sum();
        d_head[[i, 0]] = sum;
        for (j, &g) in row.iter().enumerate() {
            d_head[[i, j + 1]] = g - sum / kk;
        }
    }
    d_head
}

impl<T: Scalar> DuelingNet<T> {
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], n_actions: usize, rng: &mut R) -> Result<Self> {
        Ok(Self { body: Mlp::new(&dueling_specs(input_dim, hidden, n_actions), rng)?, n_actions })
    }

    pub fn from_body(body: Mlp<T>) -> Self {
        let n_actions = body.output_dim() - 1;
        Self { body, n_actions }
    }

    /// Raw dueling-layer output `(V, A_1..A_K)` per row.
    pub fn head(&self, x: ArrayView2<T>) -> Array2<T> {
        self.body.forward(x)
    }

    pub fn forward(&self, x: ArrayView2<T>) -> Array2<T> {
        aggregate(&self.body.forward(x))
    }

    /// Q values of a single input row.
    pub fn q_values(&self, input: &[T]) -> Vec<T> {
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row input");
        self.forward(x).into_raw_vec_and_offset().0
    }

    pub fn forward_cached(&self, x: ArrayView2<T>) -> (Array2<T>, ForwardCache<T>) {
        let cache = self.body.forward_cached(x);
        (aggregate(cache.output()), cache)
    }

    pub fn backward(&self, cache: &ForwardCache<T>, d_q: &Array2<T>) -> Gradients<T> {
        self.body.backward(cache, aggregate_backward(d_q))
    }

    pub fn num_params(&self) -> usize {
        self.body.num_params()
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
