//! Brute-force reference implementations, written straight from the metric
//! and loss definitions without touching library code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

/// Row-major points.
pub type Points = Vec<Vec<f64>>;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn members(assign: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &a) in assign.iter().enumerate() {
        m.entry(a).or_default().push(i);
    }
    m
}

fn mean_of(x: &Points, idx: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; x[0].len()];
    for &i in idx {
        for (cj, v) in c.iter_mut().zip(&x[i]) {
            *cj += v;
        }
    }
    c.iter().map(|v| v / idx.len() as f64).collect()
}

/// `-(1/b) sum_i ln((sum_{j != i, same} e^{-d/T} + eps) / (sum_{k != i} e^{-d/T} + eps))`
/// with cosine distance `1 - cos`, clamped to [0, 2].
pub fn snnl(x: &Points, labels: &[usize], t: f64) -> f64 {
    let b = x.len();
    let cosine = |i: usize, j: usize| {
        let dot: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum();
        let ni = x[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        let nj = x[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        (1.0 - dot / (ni * nj)).clamp(0.0, 2.0)
    };
    let mut total = 0.0;
    for i in 0..b {
        let mut same = 0.0;
        let mut all = 0.0;
        for j in 0..b {
            if j == i {
                continue;
            }
            let w = (-cosine(i, j) / t).exp();
            all += w;
            if labels[j] == labels[i] {
                same += w;
            }
        }
        total += ((same + 1e-8) / (all + 1e-8)).max(1e-30).ln();
    }
    -total / b as f64
}

pub fn davies_bouldin(x: &Points, assign: &[usize]) -> f64 {
    let groups: Vec<Vec<usize>> = members(assign).into_values().collect();
    let cents: Vec<Vec<f64>> = groups.iter().map(|g| mean_of(x, g)).collect();
    let s: Vec<f64> = groups
        .iter()
        .zip(&cents)
        .map(|(g, c)| g.iter().map(|&i| dist(&x[i], c)).sum::<f64>() / g.len() as f64)
        .collect();
    let k = groups.len();
    (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| (s[i] + s[j]) / dist(&cents[i], &cents[j]))
                .fold(f64::MIN, f64::max)
        })
        .sum::<f64>()
        / k as f64
}

pub fn silhouette(x: &Points, assign: &[usize]) -> f64 {
    let groups = members(assign);
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        let own = &groups[&assign[i]];
        if own.len() == 1 {
            continue;
        }
        let a = own
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| dist(&x[i], &x[j]))
            .sum::<f64>()
            / (own.len() - 1) as f64;
        let b = groups
            .iter()
            .filter(|(&c, _)| c != assign[i])
            .map(|(_, g)| g.iter().map(|&j| dist(&x[i], &x[j])).sum::<f64>() / g.len() as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

/// Traces of the full between- and within-cluster dispersion matrices.
pub fn calinski_harabasz(x: &Points, assign: &[usize]) -> f64 {
    let m = x[0].len();
    let all: Vec<usize> = (0..x.len()).collect();
    let c = mean_of(x, &all);
    let groups = members(assign);
    let mut bk = vec![vec![0.0; m]; m];
    let mut wk = vec![vec![0.0; m]; m];
    for g in groups.values() {
        let cq = mean_of(x, g);
        for r in 0..m {
            for s in 0..m {
                bk[r][s] += g.len() as f64 * (cq[r] - c[r]) * (cq[s] - c[s]);
                for &i in g {
                    wk[r][s] += (x[i][r] - cq[r]) * (x[i][s] - cq[s]);
                }
            }
        }
    }
    let trace = |mat: &Vec<Vec<f64>>| (0..m).map(|i| mat[i][i]).sum::<f64>();
    let (n, k) = (x.len() as f64, groups.len() as f64);
    trace(&bk) / trace(&wk) * (n - k) / (k - 1.0)
}

/// Mutual information and entropies from empirical probabilities.
pub fn nmi(y: &[usize], c: &[usize]) -> f64 {
    let n = y.len() as f64;
    let ys: BTreeSet<usize> = y.iter().copied().collect();
    let cs: BTreeSet<usize> = c.iter().copied().collect();
    let p = |pred: &dyn Fn(usize) -> bool| (0..y.len()).filter(|&i| pred(i)).count() as f64 / n;
    let h = |vals: &BTreeSet<usize>, v: &[usize]| {
        -vals
            .iter()
            .map(|&a| {
                let q = p(&|i| v[i] == a);
                q * q.ln()
            })
            .sum::<f64>()
    };
    let (hy, hc) = (h(&ys, y), h(&cs, c));
    if hy + hc == 0.0 {
        return 1.0;
    }
    let mut mi = 0.0;
    for &a in &ys {
        for &b in &cs {
            let pab = p(&|i| y[i] == a && c[i] == b);
            if pab > 0.0 {
                mi += pab * (pab / (p(&|i| y[i] == a) * p(&|i| c[i] == b))).ln();
            }
        }
    }
    2.0 * mi / (hy + hc)
}

/// Pair enumeration: counts of pairs grouped together in both, one or
/// neither partition, combined with the Hubert-Arabie formula.
pub fn adjusted_rand(y: &[usize], c: &[usize]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..y.len() {
        for j in i + 1..y.len() {
            match (y[i] == y[j], c[i] == c[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let denom = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (n00 * n11 - n01 * n10) / denom
}

/// Tries every injective map from clusters to classes (padding with unused
/// class ids when there are more clusters than classes).
pub fn clustering_accuracy(y: &[usize], c: &[usize]) -> f64 {
    let clusters: Vec<usize> = c.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut classes: Vec<usize> = y.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut pad = usize::MAX;
    while classes.len() < clusters.len() {
        classes.push(pad);
        pad -= 1;
    }
    fn search(
        depth: usize,
        clusters: &[usize],
        classes: &[usize],
        used: &mut Vec<bool>,
        map: &mut BTreeMap<usize, usize>,
        y: &[usize],
        c: &[usize],
    ) -> usize {
        if depth == clusters.len() {
            return (0..y.len()).filter(|&i| map[&c[i]] == y[i]).count();
        }
        let mut best = 0;
        for k in 0..classes.len() {
            if used[k] {
                continue;
            }
            used[k] = true;
            map.insert(clusters[depth], classes[k]);
            best = best.max(search(depth + 1, clusters, classes, used, map, y, c));
            used[k] = false;
        }
        best
    }
    let mut used = vec![false; classes.len()];
    let hits = search(0, &clusters, &classes, &mut used, &mut BTreeMap::new(), y, c);
    hits as f64 / y.len() as f64
}

/// Writes a toy word-vector file and a labeled corpus whose classes use
/// disjoint vocabularies. Returns `(corpus, vectors)` paths.
pub fn write_toy_corpus(dir: &std::path::Path, rows: usize) -> (std::path::PathBuf, std::path::PathBuf) {
    use std::fmt::Write as _;
    let topics = [
        ["market", "stocks", "shares", "profit", "earnings"],
        ["football", "league", "coach", "season", "striker"],
        ["software", "internet", "computer", "chip", "browser"],
        ["election", "minister", "treaty", "embassy", "senate"],
    ];
    let dim = 8;
    let mut vectors = String::new();
    for (t, words) in topics.iter().enumerate() {
        for (w, word) in words.iter().enumerate() {
            let values: Vec<String> = (0..dim)
                .map(|j| {
                    let base = if j % 4 == t { 1.0 } else { 0.1 };
                    format!("{:.4}", base + 0.05 * ((w * 7 + j * 3) % 5) as f64)
                })
                .collect();
            writeln!(vectors, "{word} {}", values.join(" ")).unwrap();
        }
    }
    let mut corpus = String::from("label,text\n");
    for r in 0..rows {
        let t = r % 4;
        let words = &topics[t];
        writeln!(
            corpus,
            "{t},\"The {} and {} {} unknownword\"",
            words[r % 5],
            words[(r / 4) % 5],
            words[(r / 3 + 1) % 5]
        )
        .unwrap();
    }
    let (c, v) = (dir.join("corpus.csv"), dir.join("vectors.txt"));
    std::fs::write(&c, corpus).unwrap();
    std::fs::write(&v, vectors).unwrap();
    (c, v)
}
