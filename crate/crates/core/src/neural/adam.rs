use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Adam with bias correction; moments are flat, in parameter order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    pub step: u64,
    pub m: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(num_params: usize, learning_rate: f64) -> Self {
        Self {
            learning_rate: T::of(learning_rate),
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            epsilon: T::of(1e-8),
            step: 0,
            m: vec![T::zero(); num_params],
            v: vec![T::zero(); num_params],
        }
    }

    /// Applies one update to `params` in place.
    pub fn step_slice(&mut self, params: &mut [T], grads: &[T]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::ShapeMismatch(format!(
                "adam state holds {} parameters, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let one = T::one();
        let c1 = one - self.beta1.powi(t);
        let c2 = one - self.beta2.powi(t);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (one - self.beta1) * g;
            *v = self.beta2 * *v + (one - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p = *p - self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }

    /// Updates every layer of `net` from gradients of the same shape.
    pub fn step(&mut self, net: &mut Mlp<T>, grads: &Gradients<T>) -> Result<()> {
        if grads.layers.len() != net.layers.len() || net.num_params() != self.m.len() {
            return Err(Error::ShapeMismatch("gradients do not match network".into()));
        }
        self.step += 1;
        let t = self.step as i32;
        let one = T::one();
        let c1 = one - self.beta1.powi(t);
        let c2 = one - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.epsilon);
        let mut off = 0;
        for (layer, (gw, gb)) in net.layers.iter_mut().zip(&grads.layers) {
            if layer.weights.dim() != gw.dim() || layer.bias.dim() != gb.dim() {
                return Err(Error::ShapeMismatch("layer gradient shape".into()));
            }
            for (p, &g) in layer.weights.iter_mut().zip(gw.iter()).chain(layer.bias.iter_mut().zip(gb.iter())) {
                let m = &mut self.m[off];
                let v = &mut self.v[off];
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                *p = *p - lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                off += 1;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradients_leave_params() {
        let mut opt: AdamState<f64> = AdamState::new(3, 0.1);
        let mut p = vec![1.0, -2.0, 3.0];
        for _ in 0..100 {
            opt.step_slice(&mut p, &[0.0; 3]).unwrap();
        }
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
        assert_eq!(opt.step, 100);
    }

    #[test]
    fn first_step_is_learning_rate() {
        let mut opt: AdamState<f64> = AdamState::new(1, 0.1);
        let mut p = vec![0.0];
        opt.step_slice(&mut p, &[1.0]).unwrap();
        // m_hat = 1, v_hat = 1 -> step = lr / (1 + eps)
        assert!((p[0] + 0.1).abs() < 1e-8);
    }

    #[test]
    fn shape_mismatch() {
        let mut opt: AdamState<f64> = AdamState::new(2, 0.1);
        assert!(matches!(opt.step_slice(&mut [0.0; 3], &[0.0; 3]), Err(Error::ShapeMismatch(_))));
    }
}
