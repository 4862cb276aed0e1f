//! Weight initializers. Samples are drawn in double precision and rounded to
//! the network's scalar type, so `f32` and `f64` networks built from the same
//! seed agree up to rounding.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use super::Scalar;

/// He initialization: `N(0, sqrt(2 / fan_in))`.
pub fn kaiming_init<F: Scalar>(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Array2<F> {
    assert!(fan_in >= 1, "fan_in must be positive");
    let std = (2.0 / fan_in as f64).sqrt();
    let dist = Normal::new(0.0, std).expect("finite std");
    Array2::from_shape_simple_fn((fan_in, fan_out), || F::cast(dist.sample(rng)))
}

/// Glorot initialization: `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`.
pub fn xavier_init<F: Scalar>(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Array2<F> {
    assert!(fan_in + fan_out >= 1, "fan_in + fan_out must be positive");
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new(-a, a).expect("a > 0");
    Array2::from_shape_simple_fn((fan_in, fan_out), || F::cast(dist.sample(rng)))
}
