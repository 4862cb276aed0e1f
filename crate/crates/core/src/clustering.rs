//! k-means (k-means++ seeding, Lloyd iterations) and PCA projection.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const KMEANS_TOLERANCE: f64 = 1e-4;
pub const KMEANS_MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub centroids: Array2<f64>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Lloyd iterations performed.
    pub iterations: usize,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
}

impl ClusterResult {
    pub fn k(&self) -> usize {
        self.centroids.nrows()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn validate(x: ArrayView2<'_, f64>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if x.nrows() < k {
        return Err(Error::InvalidArgument(format!(
            "cannot form {k} clusters from {} points",
            x.nrows()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("features contain non-finite values".into()));
    }
    Ok(())
}

/// k-means++ seeding: the first centroid uniformly, each further one with
/// probability proportional to its squared distance from the nearest chosen
/// centroid.
pub fn kmeans_plus_plus(x: ArrayView2<'_, f64>, k: usize, seed: u64) -> Result<Array2<f64>> {
    validate(x, k)?;
    let n = x.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|i| squared_distance(x.row(i), x.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in nearest.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` just short of `target`.
            pick.unwrap_or_else(|| nearest.iter().rposition(|&d| d > 0.0).expect("total > 0"))
        } else {
            // Every point coincides with a chosen centroid; the repair step
            // in Lloyd's loop sorts out the resulting duplicates.
            rng.random_range(0..n)
        };
        chosen.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(squared_distance(x.row(i), x.row(next)));
        }
    }
    Ok(x.select(Axis(0), &chosen))
}

/// k-means with k-means++ seeding and a single restart.
pub fn kmeans(x: ArrayView2<'_, f64>, k: usize, seed: u64) -> Result<ClusterResult> {
    let init = kmeans_plus_plus(x, k, seed)?;
    kmeans_with_init(x, init)
}

fn assign(x: ArrayView2<'_, f64>, centroids: &Array2<f64>, assignments: &mut [usize], dists: &mut [f64]) {
    for (i, row) in x.axis_iter(Axis(0)).enumerate() {
        let mut best = (0, f64::INFINITY);
        for (c, centroid) in centroids.axis_iter(Axis(0)).enumerate() {
            let d = squared_distance(row, centroid);
            if d < best.1 {
                best = (c, d);
            }
        }
        assignments[i] = best.0;
        dists[i] = best.1;
    }
}

/// Moves the point farthest from its centroid into each empty cluster,
/// taking only from clusters that keep at least one member.
fn repair_empty(assignments: &mut [usize], dists: &mut [f64], k: usize) -> bool {
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    let mut repaired = false;
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..assignments.len())
            .filter(|&i| sizes[assignments[i]] > 1)
            .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
            .expect("n >= k leaves a cluster with a spare point");
        sizes[assignments[donor]] -= 1;
        sizes[empty] = 1;
        assignments[donor] = empty;
        dists[donor] = 0.0;
        repaired = true;
    }
    repaired
}

fn update_centroids(x: ArrayView2<'_, f64>, assignments: &[usize], k: usize) -> Array2<f64> {
    let mut sums = Array2::<f64>::zeros((k, x.ncols()));
    let mut counts = vec![0usize; k];
    for (row, &a) in x.axis_iter(Axis(0)).zip(assignments) {
        let mut s = sums.row_mut(a);
        s += &row;
        counts[a] += 1;
    }
    for (mut s, &c) in sums.axis_iter_mut(Axis(0)).zip(&counts) {
        s /= c.max(1) as f64;
    }
    sums
}

/// Lloyd iterations from the given initial centroids.
pub fn kmeans_with_init(x: ArrayView2<'_, f64>, init: Array2<f64>) -> Result<ClusterResult> {
    let k = init.nrows();
    validate(x, k)?;
    if init.ncols() != x.ncols() {
        return Err(Error::Dimension(format!(
            "centroids have width {}, data has {}",
            init.ncols(),
            x.ncols()
        )));
    }
    let n = x.nrows();
    let mut centroids = init;
    let mut assignments = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        assign(x, &centroids, &mut assignments, &mut dists);
        if repair_empty(&mut assignments, &mut dists, k) {
            // Recompute distances against the centroids the repaired
            // clusters are about to receive.
            centroids = update_centroids(x, &assignments, k);
            for (i, &a) in assignments.iter().enumerate() {
                dists[i] = squared_distance(x.row(i), centroids.row(a));
            }
        }
        let inertia: f64 = dists.iter().sum();
        centroids = update_centroids(x, &assignments, k);
        let converged = match history.last() {
            Some(&prev) => prev <= 0.0 || (prev - inertia) / prev < KMEANS_TOLERANCE,
            None => inertia == 0.0,
        };
        history.push(inertia);
        if converged || iterations >= KMEANS_MAX_ITERATIONS {
            break;
        }
    }
    // Final inertia against the returned centroids.
    let inertia = assignments
        .iter()
        .enumerate()
        .map(|(i, &a)| squared_distance(x.row(i), centroids.row(a)))
        .sum();
    Ok(ClusterResult {
        centroids,
        assignments,
        inertia,
        iterations,
        inertia_history: history,
    })
}

/// Writes `index,assignment` rows with a header.
pub fn write_assignments_to(assignments: &[usize], w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let fail = |e: csv::Error| Error::Format {
        what: "assignments",
        message: e.to_string(),
    };
    wtr.write_record(["index", "assignment"]).map_err(fail)?;
    for (i, a) in assignments.iter().enumerate() {
        wtr.write_record([i.to_string(), a.to_string()]).map_err(fail)?;
    }
    wtr.flush().map_err(|e| Error::Format {
        what: "assignments",
        message: e.to_string(),
    })
}

pub fn write_assignments(assignments: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_assignments_to(assignments, std::io::BufWriter::new(file))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    /// `dims x m`, rows orthonormal, sorted by descending variance.
    pub components: Array2<f64>,
    pub mean: Array1<f64>,
    /// Covariance eigenvalues of the kept components.
    pub explained_variance: Vec<f64>,
    /// `n x dims` coordinates of the input rows.
    pub projected: Array2<f64>,
}

impl PcaProjection {
    /// Projects new rows with the fitted mean and basis.
    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::Dimension(format!(
                "projection expects width {}, got {}",
                self.mean.len(),
                x.ncols()
            )));
        }
        Ok((&x - &self.mean).dot(&self.components.t()))
    }

    pub fn reconstruct(&self, projected: ArrayView2<'_, f64>) -> Array2<f64> {
        projected.dot(&self.components) + &self.mean
    }
}

/// Projects `x` onto the top `dims` eigenvectors of its sample covariance.
/// Each component is signed so its largest-magnitude coordinate is positive.
pub fn pca_project(x: ArrayView2<'_, f64>, dims: usize) -> Result<PcaProjection> {
    let (n, m) = x.dim();
    if n < 2 {
        return Err(Error::InvalidArgument("PCA needs at least two rows".into()));
    }
    if dims == 0 || dims > m {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {dims} components of {m}-dimensional data"
        )));
    }
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let centered = &x - &mean;
    let cov = centered.t().dot(&centered) / (n - 1) as f64;
    let eigen = SymmetricEigen::new(DMatrix::from_fn(m, m, |i, j| cov[[i, j]]));
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));
    let mut components = Array2::zeros((dims, m));
    let mut explained = Vec::with_capacity(dims);
    for (r, &c) in order.iter().take(dims).enumerate() {
        let v = eigen.eigenvectors.column(c);
        let pivot = (0..m)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .expect("m >= 1");
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..m {
            components[[r, j]] = sign * v[j];
        }
        explained.push(eigen.eigenvalues[c].max(0.0));
    }
    let projected = centered.dot(&components.t());
    Ok(PcaProjection {
        components,
        mean,
        explained_variance: explained,
        projected,
    })
}
