use ndarray::{Array2, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use super::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Softmax,
    Logistic,
    Identity,
}

impl Activation {
    pub fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Softmax => 1,
            Activation::Logistic => 2,
            Activation::Identity => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => Activation::Relu,
            1 => Activation::Softmax,
            2 => Activation::Logistic,
            3 => Activation::Identity,
            _ => return None,
        })
    }

    /// Applies the nonlinearity in place to a batch of pre-activations.
    pub fn apply<F: Scalar>(self, z: &mut Array2<F>) {
        match self {
            Activation::Identity => {}
            Activation::Relu => z.mapv_inplace(|v| if v > F::zero() { v } else { F::zero() }),
            Activation::Logistic => z.mapv_inplace(logistic),
            Activation::Softmax => {
                for mut row in z.axis_iter_mut(Axis(0)) {
                    let max = row.iter().copied().fold(F::neg_infinity(), F::max);
                    row.mapv_inplace(|v| (v - max).exp());
                    let sum = row.sum();
                    row.mapv_inplace(|v| v / sum);
                }
            }
        }
    }

    /// Gradient with respect to the pre-activation, given the activation
    /// output and the gradient with respect to that output.
    pub fn backward<F: Scalar>(self, out: ArrayView2<'_, F>, grad_out: ArrayView2<'_, F>) -> Array2<F> {
        match self {
            Activation::Identity => grad_out.to_owned(),
            Activation::Relu => Zip::from(&out)
                .and(&grad_out)
                .map_collect(|&o, &g| if o > F::zero() { g } else { F::zero() }),
            Activation::Logistic => Zip::from(&out)
                .and(&grad_out)
                .map_collect(|&o, &g| g * o * (F::one() - o)),
            Activation::Softmax => {
                let mut grad = Array2::zeros(out.raw_dim());
                for ((mut dz, o), g) in grad
                    .axis_iter_mut(Axis(0))
                    .zip(out.axis_iter(Axis(0)))
                    .zip(grad_out.axis_iter(Axis(0)))
                {
                    let dot = o.dot(&g);
                    Zip::from(&mut dz)
                        .and(&o)
                        .and(&g)
                        .for_each(|d, &o, &g| *d = o * (g - dot));
                }
                grad
            }
        }
    }
}

fn logistic<F: Scalar>(v: F) -> F {
    if v >= F::zero() {
        F::one() / (F::one() + (-v).exp())
    } else {
        let e = v.exp();
        e / (F::one() + e)
    }
}
