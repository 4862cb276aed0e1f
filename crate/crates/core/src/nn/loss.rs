//! Primary losses. Values are accumulated in double precision; gradients
//! are returned with respect to the output layer's pre-activation, fused with
//! the matching output nonlinearity.

use ndarray::{Array2, ArrayView2, Zip};

use super::Scalar;
use crate::error::{Error, Result};
use crate::snnl::LOG_FLOOR;

fn clamped_ln(v: f64) -> f64 {
    v.max(LOG_FLOOR).ln()
}

fn same_shape<F>(a: ArrayView2<'_, F>, b: ArrayView2<'_, F>, what: &str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "{what}: targets {:?} vs predictions {:?}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

pub fn one_hot<F: Scalar>(labels: &[usize], classes: usize) -> Result<Array2<F>> {
    let mut y = Array2::zeros((labels.len(), classes));
    for (i, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(Error::InvalidArgument(format!("label {l} outside [0, {classes})")));
        }
        y[(i, l)] = F::one();
    }
    Ok(y)
}

/// Mean over the batch of `-sum_i y_i ln p_i`.
pub fn cross_entropy<F: Scalar>(y: ArrayView2<'_, F>, p: ArrayView2<'_, F>) -> Result<f64> {
    same_shape(y, p, "cross entropy")?;
    let b = y.nrows().max(1) as f64;
    let mut total = 0.0;
    Zip::from(&y).and(&p).for_each(|&t, &q| {
        let t = t.widen();
        if t != 0.0 {
            total -= t * clamped_ln(q.widen());
        }
    });
    Ok(total / b)
}

/// `(p - y) / b`: gradient of mean cross entropy through a softmax output.
pub fn softmax_cross_entropy_gradient<F: Scalar>(y: ArrayView2<'_, F>, p: ArrayView2<'_, F>) -> Result<Array2<F>> {
    same_shape(y, p, "cross entropy")?;
    let inv_b = F::cast(1.0 / y.nrows().max(1) as f64);
    Ok(Zip::from(&p).and(&y).map_collect(|&p, &y| (p - y) * inv_b))
}

/// Mean over examples of the per-dimension summed binary cross entropy.
pub fn binary_cross_entropy<F: Scalar>(x: ArrayView2<'_, F>, r: ArrayView2<'_, F>) -> Result<f64> {
    same_shape(x, r, "binary cross entropy")?;
    if let Some(v) = x.iter().find(|v| !(F::zero()..=F::one()).contains(*v)) {
        return Err(Error::InvalidArgument(format!(
            "binary cross entropy target {v} outside [0, 1]; scale the features first"
        )));
    }
    let n = x.nrows().max(1) as f64;
    let mut total = 0.0;
    Zip::from(&x).and(&r).for_each(|&t, &q| {
        let (t, q) = (t.widen(), q.widen());
        if t != 0.0 {
            total -= t * clamped_ln(q);
        }
        if t != 1.0 {
            total -= (1.0 - t) * clamped_ln(1.0 - q);
        }
    });
    Ok(total / n)
}

/// `(r - x) / n`: gradient of [`binary_cross_entropy`] through a logistic output.
pub fn logistic_bce_gradient<F: Scalar>(x: ArrayView2<'_, F>, r: ArrayView2<'_, F>) -> Result<Array2<F>> {
    same_shape(x, r, "binary cross entropy")?;
    let inv_n = F::cast(1.0 / x.nrows().max(1) as f64);
    Ok(Zip::from(&r).and(&x).map_collect(|&r, &x| (r - x) * inv_n))
}
