use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layer::{Dense, LayerSpec};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Feed-forward stack of dense layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MlpRepr", try_from = "MlpRepr", bound = "")]
pub struct Mlp<T: Scalar> {
    pub layers: Vec<Dense<T>>,
}

/// Serialized form: layer specs plus the flat parameter vector in `f64`.
#[derive(Serialize, Deserialize)]
struct MlpRepr {
    layers: Vec<LayerSpec>,
    params: Vec<f64>,
}

impl<T: Scalar> From<Mlp<T>> for MlpRepr {
    fn from(m: Mlp<T>) -> Self {
        MlpRepr { layers: m.specs(), params: m.params_flat().into_iter().map(Scalar::as_f64).collect() }
    }
}

impl<T: Scalar> TryFrom<MlpRepr> for Mlp<T> {
    type Error = Error;
    fn try_from(r: MlpRepr) -> Result<Self> {
        let mut net = Mlp { layers: r.layers.iter().map(|&s| Dense::zeros(s)).collect() };
        let flat: Vec<T> = r.params.into_iter().map(T::of).collect();
        net.set_params_flat(&flat)?;
        Ok(net)
    }
}

/// Layer activations from a forward pass; `acts[0]` is the input.
#[derive(Debug, Clone)]
pub struct ForwardCache<T: Scalar> {
    pub acts: Vec<Array2<T>>,
}

impl<T: Scalar> ForwardCache<T> {
    pub fn output(&self) -> &Array2<T> {
        self.acts.last().expect("cache holds at least the input")
    }
}

/// Parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T: Scalar> {
    pub layers: Vec<(Array2<T>, Array1<T>)>,
}

impl<T: Scalar> Gradients<T> {
    pub fn flat(&self) -> Vec<T> {
        self.layers.iter().flat_map(|(w, b)| w.iter().chain(b.iter()).copied()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.layers.iter().all(|(w, b)| w.iter().chain(b.iter()).all(|v| v.is_zero()))
    }
}

impl<T: Scalar> Mlp<T> {
    pub fn new<R: Rng + ?Sized>(specs: &[LayerSpec], rng: &mut R) -> Result<Self> {
        for pair in specs.windows(2) {
            if pair[0].output_dim != pair[1].input_dim {
                return Err(Error::ShapeMismatch(format!(
                    "layer output {} feeds input {}",
                    pair[0].output_dim, pair[1].input_dim
                )));
            }
        }
        if specs.iter().any(|s| s.input_dim == 0 || s.output_dim == 0) {
            return Err(Error::ShapeMismatch("layer dims must be >= 1".into()));
        }
        Ok(Self { layers: specs.iter().map(|&s| Dense::init(s, rng)).collect() })
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Dense::spec).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weights.ncols())
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(Dense::num_params).sum()
    }

    pub fn forward(&self, x: ArrayView2<T>) -> Array2<T> {
        let mut layers = self.layers.iter();
        let first = layers.next().expect("non-empty network");
        layers.fold(first.forward(x), |a, l| l.forward(a.view()))
    }

    pub fn forward_cached(&self, x: ArrayView2<T>) -> ForwardCache<T> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        for l in &self.layers {
            let next = l.forward(acts.last().unwrap().view());
            acts.push(next);
        }
        ForwardCache { acts }
    }

    /// Backpropagates `d_out = dL/d(output)` through the cached pass.
    pub fn backward(&self, cache: &ForwardCache<T>, d_out: Array2<T>) -> Gradients<T> {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = d_out;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let out = &cache.acts[i + 1];
            let act = layer.activation;
            Zip::from(&mut delta).and(out).for_each(|d, &a| *d = *d * act.derivative_from_output(a));
            let input = &cache.acts[i];
            let dw = input.t().dot(&delta);
            let db = delta.sum_axis(Axis(0));
            if i > 0 {
                let next = delta.dot(&layer.weights.t());
                grads.push((dw, db));
                delta = next;
            } else {
                grads.push((dw, db));
            }
        }
        grads.reverse();
        Gradients { layers: grads }
    }

    /// All parameters, layer by layer: weights (row-major, input-major) then biases.
    pub fn params_flat(&self) -> Vec<T> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied()).collect()
    }

    pub fn set_params_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                flat.len()
            )));
        }
        let mut off = 0;
        for l in &mut self.layers {
            for v in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *v = flat[off];
                off += 1;
            }
        }
        Ok(())
    }
}
