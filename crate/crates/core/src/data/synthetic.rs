//! Gaussian blob datasets for tests, examples and benchmarks.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::EmbeddedDataset;
use crate::error::{Error, Result};

/// `classes` isotropic Gaussian blobs with unit standard deviation in `dim`
/// dimensions. Centers sit on scaled basis vectors, so every pair of centers
/// is `separation` standard deviations apart. Rows are shuffled.
pub fn simplex_blobs(
    classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<EmbeddedDataset> {
    if classes == 0 || classes > dim {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= classes <= dim, got {classes} classes in {dim} dimensions"
        )));
    }
    let scale = separation / std::f64::consts::SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..classes).flat_map(|c| std::iter::repeat_n(c, per_class)).collect();
    labels.shuffle(&mut rng);
    let mut features = Array2::zeros((labels.len(), dim));
    for (mut row, &c) in features.rows_mut().into_iter().zip(&labels) {
        for v in row.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        row[c] += scale;
    }
    EmbeddedDataset::new(features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_balance() {
        let ds = simplex_blobs(4, 25, 10, 1.5, 3).unwrap();
        assert_eq!((ds.len(), ds.dim(), ds.num_classes()), (100, 10, 4));
        for c in 0..4 {
            assert_eq!(ds.labels().iter().filter(|&&l| l == c).count(), 25);
        }
        assert_eq!(ds, simplex_blobs(4, 25, 10, 1.5, 3).unwrap());
        assert!(simplex_blobs(5, 1, 4, 1.0, 0).is_err());
    }

    #[test]
    fn class_means_sit_at_the_centers() {
        let ds = simplex_blobs(2, 4000, 3, 3.0, 1).unwrap();
        let scale = 3.0 / std::f64::consts::SQRT_2;
        for c in 0..2 {
            let rows: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels()[i] == c).collect();
            let mean = ds.select(&rows).features().mean_axis(ndarray::Axis(0)).unwrap();
            for j in 0..3 {
                let expect = if j == c { scale } else { 0.0 };
                assert!((mean[j] - expect).abs() < 0.06, "class {c} dim {j}: {}", mean[j]);
            }
        }
    }
}
