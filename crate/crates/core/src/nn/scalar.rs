use std::fmt::{Debug, Display};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, NumAssignOps};

/// Floating-point element type of a network: `f32` for fast training, `f64`
/// for gradient checks.
pub trait Scalar:
    LinalgScalar + Float + NumAssignOps + ScalarOperand + Debug + Display + Default + Send + Sync + 'static
{
    fn cast(v: f64) -> Self;
    fn widen(self) -> f64;
}

impl Scalar for f32 {
    fn cast(v: f64) -> Self {
        v as f32
    }
    fn widen(self) -> f64 {
        f64::from(self)
    }
}

impl Scalar for f64 {
    fn cast(v: f64) -> Self {
        v
    }
    fn widen(self) -> f64 {
        self
    }
}
