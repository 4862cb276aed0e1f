//! Soft nearest neighbor loss over pairwise cosine distances.
//!
//! For a batch of `b` representations `x` with labels `y` at temperature `T`,
//!
//! ```text
//! loss = -1/b * sum_i log( (N_i + eps) / (D_i + eps) )
//! N_i  = sum_{j != i, y_j = y_i} exp(-d_ij / T)
//! D_i  = sum_{k != i}            exp(-d_ik / T)
//! d_ij = 1 - cos(x_i, x_j)
//! ```
//!
//! `eps` keeps the log finite for points without a same-class neighbor in the
//! batch. All arithmetic is double precision.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Added to the same-class and all-neighbor sums before taking the ratio.
pub const SUM_EPSILON: f64 = 1e-8;
/// Lower bound applied to every log argument in the crate.
pub const LOG_FLOOR: f64 = 1e-30;

/// `T(i) = 1 / (eta + i)^gamma`, with the epoch index `i` starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSchedule {
    pub eta: f64,
    pub gamma: f64,
}

impl Default for TemperatureSchedule {
    fn default() -> Self {
        TemperatureSchedule { eta: 1.0, gamma: 0.55 }
    }
}

impl TemperatureSchedule {
    pub fn new(eta: f64, gamma: f64) -> Result<Self> {
        if !(eta >= 1.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be >= 1, got {eta}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be > 0, got {gamma}")));
        }
        Ok(TemperatureSchedule { eta, gamma })
    }

    pub fn temperature(&self, epoch: usize) -> f64 {
        annealing_temperature(epoch, self)
    }
}

pub fn annealing_temperature(epoch: usize, schedule: &TemperatureSchedule) -> f64 {
    (schedule.eta + epoch as f64).powf(schedule.gamma).recip()
}

/// Row norms below this are rejected by the strict cosine path.
fn checked_norms(x: ArrayView2<'_, f64>, floor: Option<f64>) -> Result<Vec<f64>> {
    x.axis_iter(Axis(0))
        .enumerate()
        .map(|(i, row)| {
            let n = row.dot(&row).sqrt();
            match floor {
                Some(f) => Ok(n.max(f)),
                None if n > 0.0 && n.is_finite() => Ok(n),
                None => Err(Error::ZeroNormRow(i)),
            }
        })
        .collect()
}

fn normalize_rows(x: ArrayView2<'_, f64>, norms: &[f64]) -> Array2<f64> {
    let mut u = x.to_owned();
    for (mut row, &n) in u.axis_iter_mut(Axis(0)).zip(norms) {
        row.mapv_inplace(|v| v / n);
    }
    u
}

/// `D[i][j] = 1 - cos(x_i, x_j)`; symmetric, zero diagonal, entries in `[0, 2]`.
pub fn pairwise_cosine_distance(x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let norms = checked_norms(x, None)?;
    let u = normalize_rows(x, &norms);
    let mut d = u.dot(&u.t());
    let b = d.nrows();
    for i in 0..b {
        d[(i, i)] = 0.0;
        for j in (i + 1)..b {
            let v = (1.0 - d[(i, j)]).clamp(0.0, 2.0);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(d)
}

/// Representations, labels and temperature for one loss evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SnnlBatch<'a> {
    x: ArrayView2<'a, f64>,
    labels: &'a [usize],
    temperature: f64,
    norm_floor: Option<f64>,
}

impl<'a> SnnlBatch<'a> {
    pub fn new(x: ArrayView2<'a, f64>, labels: &'a [usize], temperature: f64) -> Result<Self> {
        if x.nrows() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} rows but {} labels",
                x.nrows(),
                labels.len()
            )));
        }
        if x.nrows() < 2 {
            return Err(Error::InvalidArgument(format!(
                "soft nearest neighbor loss needs at least 2 points, got {}",
                x.nrows()
            )));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        Ok(SnnlBatch {
            x,
            labels,
            temperature,
            norm_floor: None,
        })
    }

    /// Treats row norms below `floor` as `floor` instead of failing. Used on
    /// hidden activations, where a ReLU layer can emit an all-zero row.
    pub fn with_norm_floor(mut self, floor: f64) -> Self {
        self.norm_floor = Some(floor);
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnnlOutput {
    pub loss: f64,
    /// Points with no same-class neighbor in the batch.
    pub isolated: usize,
}

impl SnnlOutput {
    /// Every point lacked a same-class neighbor, so the loss is made up
    /// entirely of epsilon-clamped terms.
    pub fn all_isolated(&self, batch_len: usize) -> bool {
        self.isolated == batch_len
    }
}

struct Pass {
    u: Array2<f64>,
    norms: Vec<f64>,
    weights: Array2<f64>,
    same: Vec<f64>,
    all: Vec<f64>,
    output: SnnlOutput,
}

fn run(batch: &SnnlBatch<'_>) -> Result<Pass> {
    let b = batch.len();
    let norms = checked_norms(batch.x, batch.norm_floor)?;
    let u = normalize_rows(batch.x, &norms);
    let gram = u.dot(&u.t());
    let t = batch.temperature;

    let mut weights = Array2::<f64>::zeros((b, b));
    let mut same = vec![0.0; b];
    let mut all = vec![0.0; b];
    let mut isolated = 0;
    let mut total = 0.0;
    for i in 0..b {
        let (mut num, mut den) = (0.0, 0.0);
        let mut has_neighbor = false;
        for k in 0..b {
            if k == i {
                continue;
            }
            let w = (-(1.0 - gram[(i, k)]) / t).exp();
            weights[(i, k)] = w;
            den += w;
            if batch.labels[k] == batch.labels[i] {
                num += w;
                has_neighbor = true;
            }
        }
        if !has_neighbor {
            isolated += 1;
        }
        same[i] = num;
        all[i] = den;
        let ratio = ((num + SUM_EPSILON) / (den + SUM_EPSILON)).max(LOG_FLOOR);
        total += ratio.ln();
    }
    let loss = (-total / b as f64).max(0.0);
    Ok(Pass {
        u,
        norms,
        weights,
        same,
        all,
        output: SnnlOutput { loss, isolated },
    })
}

pub fn snnl_forward(batch: &SnnlBatch<'_>) -> Result<SnnlOutput> {
    run(batch).map(|p| p.output)
}

pub fn snnl_gradient(batch: &SnnlBatch<'_>) -> Result<Array2<f64>> {
    snnl_loss_and_gradient(batch).map(|(_, g)| g)
}

/// Loss and `d loss / d x` from a single pass over the batch.
pub fn snnl_loss_and_gradient(batch: &SnnlBatch<'_>) -> Result<(SnnlOutput, Array2<f64>)> {
    let pass = run(batch)?;
    let b = batch.len();
    let scale = 1.0 / (b as f64 * batch.temperature);

    // coupling[i][k] = d loss / d d_ik through row i's terms
    let mut coupling = Array2::<f64>::zeros((b, b));
    for i in 0..b {
        let inv_num = 1.0 / (pass.same[i] + SUM_EPSILON);
        let inv_den = 1.0 / (pass.all[i] + SUM_EPSILON);
        for k in 0..b {
            if k == i {
                continue;
            }
            let same = if batch.labels[k] == batch.labels[i] {
                inv_num
            } else {
                0.0
            };
            coupling[(i, k)] = scale * pass.weights[(i, k)] * (same - inv_den);
        }
    }
    let symmetric = &coupling + &coupling.t();
    // d d_ik / d u_i = -u_k
    let grad_u = -symmetric.dot(&pass.u);

    let mut grad = grad_u;
    for (i, mut g) in grad.axis_iter_mut(Axis(0)).enumerate() {
        let u_i = pass.u.row(i);
        let n = pass.norms[i];
        let floored = batch.norm_floor.is_some_and(|f| n <= f);
        if floored {
            g.mapv_inplace(|v| v / n);
        } else {
            let radial = g.dot(&u_i);
            g.zip_mut_with(&u_i, |gv, &uv| *gv = (*gv - radial * uv) / n);
        }
    }
    Ok((pass.output, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn temperature_values() {
        let s = TemperatureSchedule::default();
        assert_eq!(s.temperature(0), 1.0);
        assert_abs_diff_eq!(s.temperature(1), 0.683_020_128_377_197_7, epsilon = 1e-12);
        assert_abs_diff_eq!(s.temperature(29), 0.154_022_195_564_102_43, epsilon = 1e-12);
        for i in 0..200 {
            assert!(s.temperature(i + 1) < s.temperature(i));
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(TemperatureSchedule::new(0.5, 0.55).is_err());
        assert!(TemperatureSchedule::new(1.0, 0.0).is_err());
        assert!(TemperatureSchedule::new(2.0, 1.0).is_ok());
    }

    #[test]
    fn cosine_distance_anchors() {
        let x = array![[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];
        let d = pairwise_cosine_distance(x.view()).unwrap();
        assert_eq!(d[(0, 1)], 0.0);
        assert_abs_diff_eq!(d[(0, 2)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(0, 3)], 2.0, epsilon = 1e-15);
        for i in 0..4 {
            assert_eq!(d[(i, i)], 0.0);
            for j in 0..4 {
                assert_eq!(d[(i, j)], d[(j, i)]);
            }
        }
    }

    #[test]
    fn zero_row_is_reported() {
        let x = array![[1.0, 0.0], [0.0, 0.0]];
        assert!(matches!(pairwise_cosine_distance(x.view()), Err(Error::ZeroNormRow(1))));
        let labels = [0, 1];
        let batch = SnnlBatch::new(x.view(), &labels, 1.0).unwrap();
        assert!(matches!(snnl_forward(&batch), Err(Error::ZeroNormRow(1))));
        assert!(snnl_forward(&batch.with_norm_floor(1e-12)).is_ok());
    }

    #[test]
    fn batch_validation() {
        let x = array![[1.0, 0.0]];
        assert!(SnnlBatch::new(x.view(), &[0], 1.0).is_err());
        let x = array![[1.0, 0.0], [0.0, 1.0]];
        assert!(SnnlBatch::new(x.view(), &[0, 1], 0.0).is_err());
        assert!(SnnlBatch::new(x.view(), &[0], 1.0).is_err());
    }

    #[test]
    fn single_class_is_exactly_zero() {
        let x = array![[1.0, 0.2], [0.3, 1.0], [-0.5, 0.4]];
        let labels = [2, 2, 2];
        let out = snnl_forward(&SnnlBatch::new(x.view(), &labels, 0.3).unwrap()).unwrap();
        assert_eq!(out.loss, 0.0);
        assert_eq!(out.isolated, 0);
    }

    #[test]
    fn all_isolated_flag() {
        let x = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let labels = [0, 1, 2];
        let batch = SnnlBatch::new(x.view(), &labels, 1.0).unwrap();
        let out = snnl_forward(&batch).unwrap();
        assert!(out.all_isolated(batch.len()));
        assert!(out.loss.is_finite() && out.loss > 10.0);
    }
}
