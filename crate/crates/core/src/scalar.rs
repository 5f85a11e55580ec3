//! Scalar abstraction shared by the neural engine and the propagation formulas.

use std::fmt::Debug;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating point type the numeric kernels are generic over.
///
/// Implemented for `f32` and `f64`; matrix products dispatch to the
/// optimized GEMM kernels for both.
pub trait Scalar:
    Float + NumAssignOps + FromPrimitive + ToPrimitive + LinalgScalar + ScalarOperand + Debug + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for hyperparameters and constants.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("scalar conversion from f64")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
