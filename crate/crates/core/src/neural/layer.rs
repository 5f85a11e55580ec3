use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
    Sigmoid,
}

impl Activation {
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Linear => z,
            Activation::Sigmoid => T::one() / (T::one() + (-z).exp()),
        }
    }

    /// Derivative expressed through the activation's output.
    pub fn derivative_from_output<T: Scalar>(self, a: T) -> T {
        match self {
            Activation::Relu => {
                if a > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Linear => T::one(),
            Activation::Sigmoid => a * (T::one() - a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

/// Fully connected layer `a = act(x W + b)` with `W` stored `(input, output)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T: Scalar> {
    pub weights: Array2<T>,
    pub bias: Array1<T>,
    pub activation: Activation,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(spec: LayerSpec) -> Self {
        assert!(spec.input_dim >= 1 && spec.output_dim >= 1, "layer dims must be >= 1");
        Self {
            weights: Array2::zeros((spec.input_dim, spec.output_dim)),
            bias: Array1::zeros(spec.output_dim),
            activation: spec.activation,
        }
    }

    /// He-style uniform fan-in initialization, zero bias.
    pub fn init<R: Rng + ?Sized>(spec: LayerSpec, rng: &mut R) -> Self {
        let mut layer = Self::zeros(spec);
        let limit = (6.0 / spec.input_dim as f64).sqrt();
        layer.weights.mapv_inplace(|_| T::of(rng.random_range(-limit..limit)));
        layer
    }

    pub fn spec(&self) -> LayerSpec {
        LayerSpec { input_dim: self.weights.nrows(), output_dim: self.weights.ncols(), activation: self.activation }
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn forward(&self, x: ArrayView2<T>) -> Array2<T> {
        let mut z = x.dot(&self.weights);
        z += &self.bias.view().insert_axis(Axis(0));
        let act = self.activation;
        if act != Activation::Linear {
            z.mapv_inplace(|v| act.apply(v));
        }
        z
    }
}
