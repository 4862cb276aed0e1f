//! Clustering and classification metrics.
//!
//! Internal criteria (Davies-Bouldin, silhouette, Calinski-Harabasz) use
//! Euclidean distance. External criteria (NMI, ARI, clustering accuracy) work
//! on a contingency table and are invariant under relabeling of either side.

use std::collections::BTreeMap;

use itertools::Itertools;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest cluster count for which accuracy matching searches every
/// permutation.
pub const MAX_EXHAUSTIVE_CLUSTERS: usize = 8;

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("{a} labels but {b} assignments")));
    }
    Ok(())
}

fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Members of each non-empty cluster, keyed by cluster id in ascending order.
fn groups(assignments: &[usize]) -> Vec<(usize, Vec<usize>)> {
    let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &a) in assignments.iter().enumerate() {
        map.entry(a).or_default().push(i);
    }
    map.into_iter().collect()
}

fn centroid(x: ArrayView2<'_, f64>, members: &[usize]) -> Array1<f64> {
    let mut c = Array1::zeros(x.ncols());
    for &i in members {
        c += &x.row(i);
    }
    c / members.len() as f64
}

fn internal_inputs(x: ArrayView2<'_, f64>, assignments: &[usize]) -> Result<Vec<(usize, Vec<usize>)>> {
    check_lengths(x.nrows(), assignments.len())?;
    let g = groups(assignments);
    if g.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least two non-empty clusters, found {}",
            g.len()
        )));
    }
    Ok(g)
}

/// Mean over clusters of the worst `(s_i + s_j) / d_ij`, where `s` is the mean
/// distance of members to their centroid and `d` the centroid distance.
pub fn davies_bouldin(x: ArrayView2<'_, f64>, assignments: &[usize]) -> Result<f64> {
    let g = internal_inputs(x, assignments)?;
    let centroids: Vec<Array1<f64>> = g.iter().map(|(_, m)| centroid(x, m)).collect();
    let scatter: Vec<f64> = g
        .iter()
        .zip(&centroids)
        .map(|((_, m), c)| m.iter().map(|&i| euclidean(x.row(i), c.view())).sum::<f64>() / m.len() as f64)
        .collect();
    let mut total = 0.0;
    for i in 0..g.len() {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..g.len() {
            if i == j {
                continue;
            }
            let d = euclidean(centroids[i].view(), centroids[j].view());
            if d == 0.0 {
                return Err(Error::CoincidentCentroids(g[i].0.min(g[j].0), g[i].0.max(g[j].0)));
            }
            worst = worst.max((scatter[i] + scatter[j]) / d);
        }
        total += worst;
    }
    Ok(total / g.len() as f64)
}

/// Mean silhouette coefficient. Points in singleton clusters score 0.
pub fn silhouette(x: ArrayView2<'_, f64>, assignments: &[usize]) -> Result<f64> {
    let g = internal_inputs(x, assignments)?;
    let n = x.nrows();
    let k = g.len();
    let mut slot = vec![0usize; n];
    let mut sizes = vec![0usize; k];
    for (s, (_, members)) in g.iter().enumerate() {
        for &i in members {
            slot[i] = s;
        }
        sizes[s] = members.len();
    }
    // sums[i * k + c]: total distance from point i to members of cluster c.
    let mut sums = vec![0.0; n * k];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(x.row(i), x.row(j));
            sums[i * k + slot[j]] += d;
            sums[j * k + slot[i]] += d;
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = slot[i];
        if sizes[own] == 1 {
            continue;
        }
        let a = sums[i * k + own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[i * k + c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

/// `(Tr(B) / Tr(W)) * (n - k) / (k - 1)`.
pub fn calinski_harabasz(x: ArrayView2<'_, f64>, assignments: &[usize]) -> Result<f64> {
    let g = internal_inputs(x, assignments)?;
    let n = x.nrows();
    let k = g.len();
    if k >= n {
        return Err(Error::Degenerate(format!("{k} clusters for {n} points")));
    }
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let mut between = 0.0;
    let mut within = 0.0;
    for (_, members) in &g {
        let c = centroid(x, members);
        let d = euclidean(c.view(), mean.view());
        between += members.len() as f64 * d * d;
        for &i in members {
            let e = euclidean(x.row(i), c.view());
            within += e * e;
        }
    }
    if within == 0.0 {
        return Err(Error::Degenerate("every cluster is a point mass".into()));
    }
    Ok(between / within * (n - k) as f64 / (k - 1) as f64)
}

/// Co-occurrence counts of true classes (rows) and clusters (columns), each
/// indexed by the rank of its label among the distinct labels seen.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    pub counts: Array2<u64>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

impl ContingencyTable {
    pub fn new(y: &[usize], c: &[usize]) -> Result<Self> {
        check_lengths(y.len(), c.len())?;
        let rank = |v: &[usize]| -> BTreeMap<usize, usize> {
            v.iter()
                .copied()
                .sorted_unstable()
                .dedup()
                .enumerate()
                .map(|(i, l)| (l, i))
                .collect()
        };
        let (ry, rc) = (rank(y), rank(c));
        let mut counts = Array2::zeros((ry.len(), rc.len()));
        for (a, b) in y.iter().zip(c) {
            counts[[ry[a], rc[b]]] += 1;
        }
        let row_sums = counts.sum_axis(Axis(1)).to_vec();
        let col_sums = counts.sum_axis(Axis(0)).to_vec();
        Ok(ContingencyTable {
            counts,
            row_sums,
            col_sums,
            n: y.len() as u64,
        })
    }
}

fn entropy(marginal: &[u64], n: f64) -> f64 {
    marginal
        .iter()
        .filter(|&&m| m > 0)
        .map(|&m| {
            let p = m as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `2 I(y, c) / (H(y) + H(c))` with natural logs; two single-cluster
/// partitions score 1.
pub fn nmi(y: &[usize], c: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(y, c)?;
    if t.n == 0 {
        return Err(Error::Empty("no labels".into()));
    }
    let n = t.n as f64;
    let (hy, hc) = (entropy(&t.row_sums, n), entropy(&t.col_sums, n));
    if hy + hc == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for ((i, j), &nij) in t.counts.indexed_iter() {
        if nij > 0 {
            let nij = nij as f64;
            mi += nij / n * (n * nij / (t.row_sums[i] as f64 * t.col_sums[j] as f64)).ln();
        }
    }
    Ok((2.0 * mi / (hy + hc)).clamp(0.0, 1.0))
}

fn pairs(v: u64) -> i128 {
    let v = i128::from(v);
    v * (v - 1) / 2
}

/// Adjusted Rand index. A zero denominator (both partitions trivial in the
/// same way) scores 1.
pub fn adjusted_rand(y: &[usize], c: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(y, c)?;
    if t.n < 2 {
        return Err(Error::InvalidArgument(
            "adjusted Rand index needs at least two points".into(),
        ));
    }
    // (index - a b / N) / ((a + b) / 2 - a b / N), scaled by 2N to stay in
    // exact integers until the final division.
    let index: i128 = t.counts.iter().map(|&v| pairs(v)).sum();
    let a: i128 = t.row_sums.iter().map(|&v| pairs(v)).sum();
    let b: i128 = t.col_sums.iter().map(|&v| pairs(v)).sum();
    let total = pairs(t.n);
    let numerator = 2 * (index * total - a * b);
    let denominator = (a + b) * total - 2 * a * b;
    if denominator == 0 {
        return Ok(1.0);
    }
    Ok(numerator as f64 / denominator as f64)
}

/// How clusters are matched to classes for [`clustering_accuracy_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    /// Every permutation; at most [`MAX_EXHAUSTIVE_CLUSTERS`] labels per side.
    Exhaustive,
    /// Hungarian assignment, any size.
    Hungarian,
    /// Exhaustive when small enough, Hungarian otherwise.
    Auto,
}

/// Square table of counts, padded with zeros.
fn square_counts(t: &ContingencyTable) -> (usize, Vec<u64>) {
    let size = t.counts.nrows().max(t.counts.ncols());
    let mut m = vec![0u64; size * size];
    for ((i, j), &v) in t.counts.indexed_iter() {
        m[j * size + i] = v;
    }
    (size, m)
}

/// Best one-to-one cluster-to-class mapping, by exhaustive search.
pub fn clustering_accuracy(y: &[usize], c: &[usize]) -> Result<f64> {
    clustering_accuracy_with(y, c, Matching::Exhaustive)
}

pub fn clustering_accuracy_with(y: &[usize], c: &[usize], matching: Matching) -> Result<f64> {
    let t = ContingencyTable::new(y, c)?;
    if t.n == 0 {
        return Err(Error::Empty("no labels".into()));
    }
    // m[cluster * size + class]
    let (size, m) = square_counts(&t);
    let exhaustive = match matching {
        Matching::Exhaustive => {
            if size > MAX_EXHAUSTIVE_CLUSTERS {
                return Err(Error::InvalidArgument(format!(
                    "{size} labels exceed the exhaustive matching limit of {MAX_EXHAUSTIVE_CLUSTERS}"
                )));
            }
            true
        }
        Matching::Hungarian => false,
        Matching::Auto => size <= MAX_EXHAUSTIVE_CLUSTERS,
    };
    let best = if exhaustive {
        (0..size)
            .permutations(size)
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(cl, &class)| m[cl * size + class])
                    .sum::<u64>()
            })
            .max()
            .unwrap_or(0)
    } else {
        let weights = Matrix::from_vec(size, size, m.iter().map(|&v| v as i64).collect()).expect("square matrix");
        kuhn_munkres(&weights).0 as u64
    };
    Ok(best as f64 / t.n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationScores {
    pub accuracy: f64,
    pub f1_weighted: f64,
    pub f1_macro: f64,
}

/// Accuracy plus support-weighted and macro F1. The macro average runs over
/// classes that appear in either `y_true` or `y_pred`.
pub fn classification_metrics(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<ClassificationScores> {
    check_lengths(y_true.len(), y_pred.len())?;
    if y_true.is_empty() {
        return Err(Error::Empty("no predictions".into()));
    }
    if let Some(&bad) = y_true.iter().chain(y_pred).find(|&&l| l >= k) {
        return Err(Error::InvalidArgument(format!("label {bad} outside [0, {k})")));
    }
    let mut tp = vec![0u64; k];
    let mut support = vec![0u64; k];
    let mut predicted = vec![0u64; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        support[t] += 1;
        predicted[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    let n = y_true.len() as f64;
    let f1: Vec<f64> = (0..k)
        .map(|c| {
            let precision = if predicted[c] > 0 {
                tp[c] as f64 / predicted[c] as f64
            } else {
                0.0
            };
            let recall = if support[c] > 0 {
                tp[c] as f64 / support[c] as f64
            } else {
                0.0
            };
            if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            }
        })
        .collect();
    let present: Vec<usize> = (0..k).filter(|&c| support[c] > 0 || predicted[c] > 0).collect();
    Ok(ClassificationScores {
        accuracy: tp.iter().sum::<u64>() as f64 / n,
        f1_weighted: (0..k).map(|c| f1[c] * support[c] as f64).sum::<f64>() / n,
        f1_macro: present.iter().map(|&c| f1[c]).sum::<f64>() / present.len() as f64,
    })
}

/// Values of every metric for one clustering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringScores {
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
    pub ari: Option<f64>,
    pub dbi: Option<f64>,
    pub silhouette: Option<f64>,
    pub chs: Option<f64>,
}

impl ClusteringScores {
    /// Computes all six metrics; a metric that is undefined for this input
    /// (for instance DBI with coincident centroids) is `None`.
    pub fn evaluate(x: ArrayView2<'_, f64>, labels: &[usize], assignments: &[usize]) -> Result<Self> {
        check_lengths(x.nrows(), labels.len())?;
        check_lengths(labels.len(), assignments.len())?;
        Ok(ClusteringScores {
            acc: clustering_accuracy_with(labels, assignments, Matching::Auto).ok(),
            nmi: nmi(labels, assignments).ok(),
            ari: adjusted_rand(labels, assignments).ok(),
            dbi: davies_bouldin(x, assignments).ok(),
            silhouette: silhouette(x, assignments).ok(),
            chs: calinski_harabasz(x, assignments).ok(),
        })
    }

    pub fn named(&self) -> [(&'static str, Option<f64>); 6] {
        [
            ("acc", self.acc),
            ("nmi", self.nmi),
            ("ari", self.ari),
            ("dbi", self.dbi),
            ("silhouette", self.silhouette),
            ("chs", self.chs),
        ]
    }
}

/// One metric across seeds. Aggregates skip missing values and are `None`
/// when every seed is missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub per_seed: Vec<Option<f64>>,
    pub avg: Option<f64>,
    pub max: Option<f64>,
    pub min: Option<f64>,
}

impl MetricSeries {
    pub fn new(per_seed: Vec<Option<f64>>) -> Self {
        let present: Vec<f64> = per_seed.iter().flatten().copied().collect();
        let (avg, max, min) = if present.is_empty() {
            (None, None, None)
        } else {
            (
                Some(present.iter().sum::<f64>() / present.len() as f64),
                Some(present.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                Some(present.iter().copied().fold(f64::INFINITY, f64::min)),
            )
        };
        MetricSeries {
            per_seed,
            avg,
            max,
            min,
        }
    }
}

/// Per-seed metric values with their aggregates, serialized as the
/// `report.json` every command writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub command: String,
    pub seeds: Vec<u64>,
    pub metrics: BTreeMap<String, MetricSeries>,
    /// Command settings echoed back for auditing.
    pub settings: BTreeMap<String, serde_json::Value>,
}

impl EvaluationReport {
    /// `per_seed` maps metric name to one value per seed, in seed order.
    pub fn new(
        command: impl Into<String>,
        seeds: Vec<u64>,
        per_seed: BTreeMap<String, Vec<Option<f64>>>,
        settings: BTreeMap<String, serde_json::Value>,
    ) -> Result<Self> {
        if let Some((name, v)) = per_seed.iter().find(|(_, v)| v.len() != seeds.len()) {
            return Err(Error::Dimension(format!(
                "metric {name} has {} values for {} seeds",
                v.len(),
                seeds.len()
            )));
        }
        Ok(EvaluationReport {
            command: command.into(),
            seeds,
            metrics: per_seed.into_iter().map(|(k, v)| (k, MetricSeries::new(v))).collect(),
            settings,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// JSON schema for [`EvaluationReport`].
pub const REPORT_SCHEMA: &str = include_str!("../schemas/report.schema.json");

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn blobs() -> (Array2<f64>, Vec<usize>) {
        (array![[-1.0], [1.0], [9.0], [11.0]], vec![0, 0, 1, 1])
    }

    #[test]
    fn internal_anchors() {
        let (x, a) = blobs();
        assert_eq!(davies_bouldin(x.view(), &a).unwrap(), 0.2);
        assert_eq!(calinski_harabasz(x.view(), &a).unwrap(), 50.0);
        let x2 = array![[0.0], [1.0], [10.0], [11.0]];
        // Outer points score 9.5/10.5, inner points 8.5/9.5.
        assert_abs_diff_eq!(
            silhouette(x2.view(), &a).unwrap(),
            (9.5 / 10.5 + 8.5 / 9.5) / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn singletons() {
        let x = array![[0.0], [3.0]];
        assert_eq!(davies_bouldin(x.view(), &[0, 1]).unwrap(), 0.0);
        assert_eq!(silhouette(x.view(), &[0, 1]).unwrap(), 0.0);
        assert!(calinski_harabasz(x.view(), &[0, 1]).is_err());
    }

    #[test]
    fn coincident_centroids_named() {
        let x = array![[-1.0], [1.0], [-2.0], [2.0]];
        match davies_bouldin(x.view(), &[0, 0, 5, 5]) {
            Err(Error::CoincidentCentroids(0, 5)) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_cluster_rejected() {
        let (x, _) = blobs();
        assert!(silhouette(x.view(), &[0, 0, 0, 0]).is_err());
        assert!(davies_bouldin(x.view(), &[1, 1, 1, 1]).is_err());
    }

    #[test]
    fn external_anchors() {
        let y = [0, 0, 1, 1];
        assert_eq!(nmi(&y, &y).unwrap(), 1.0);
        assert_abs_diff_eq!(nmi(&y, &[1, 1, 0, 0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(nmi(&y, &[0, 1, 0, 1]).unwrap(), 0.0, epsilon = 1e-15);
        assert_eq!(nmi(&[3, 3], &[1, 1]).unwrap(), 1.0);
        assert_eq!(adjusted_rand(&y, &[0, 1, 0, 1]).unwrap(), -0.5);
        assert_eq!(adjusted_rand(&y, &[5, 5, 2, 2]).unwrap(), 1.0);
        assert_eq!(clustering_accuracy(&y, &[0, 1, 0, 1]).unwrap(), 0.5);
        assert_eq!(clustering_accuracy(&y, &[1, 1, 0, 0]).unwrap(), 1.0);
        assert!(nmi(&y, &[0]).is_err());
    }

    #[test]
    fn accuracy_matching_limits() {
        let y: Vec<usize> = (0..10).collect();
        assert!(clustering_accuracy(&y, &y).is_err());
        assert_eq!(clustering_accuracy_with(&y, &y, Matching::Hungarian).unwrap(), 1.0);
        assert_eq!(clustering_accuracy_with(&y, &y, Matching::Auto).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_with_unequal_counts() {
        // Three clusters over two classes: one cluster stays unmatched.
        let y = [0, 0, 0, 1, 1, 1];
        let c = [0, 0, 1, 2, 2, 2];
        assert_abs_diff_eq!(clustering_accuracy(&y, &c).unwrap(), 5.0 / 6.0);
        assert_abs_diff_eq!(
            clustering_accuracy_with(&y, &c, Matching::Hungarian).unwrap(),
            5.0 / 6.0
        );
    }

    #[test]
    fn classification_anchor() {
        let s = classification_metrics(&[1, 1, 0, 0], &[1, 0, 0, 0], 2).unwrap();
        assert_eq!(s.accuracy, 0.75);
        assert_abs_diff_eq!(s.f1_macro, (2.0 / 3.0 + 0.8) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.f1_weighted, s.f1_macro, epsilon = 1e-12);
        let perfect = classification_metrics(&[0, 2, 1], &[0, 2, 1], 3).unwrap();
        assert_eq!(
            (perfect.accuracy, perfect.f1_weighted, perfect.f1_macro),
            (1.0, 1.0, 1.0)
        );
        assert!(classification_metrics(&[0, 3], &[0, 1], 3).is_err());
        assert!(classification_metrics(&[0], &[0, 1], 3).is_err());
    }

    #[test]
    fn series_aggregates() {
        let s = MetricSeries::new(vec![Some(1.0), None, Some(3.0)]);
        assert_eq!((s.avg, s.max, s.min), (Some(2.0), Some(3.0), Some(1.0)));
        let empty = MetricSeries::new(vec![None]);
        assert_eq!(empty.avg, None);
    }

    #[test]
    fn report_rejects_ragged_series() {
        let mut per_seed = BTreeMap::new();
        per_seed.insert("acc".to_string(), vec![Some(1.0)]);
        assert!(EvaluationReport::new("x", vec![1, 2], per_seed, BTreeMap::new()).is_err());
    }

    #[test]
    fn schema_parses() {
        let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
        assert_eq!(schema["type"], "object");
    }
}
