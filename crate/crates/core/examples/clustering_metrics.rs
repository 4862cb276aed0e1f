//! k-means on synthetic blobs at several separations, scored with every
//! internal and external clustering criterion.
//!
//! ```text
//! cargo run --release --example clustering_metrics
//! ```

use disentangle::clustering::kmeans;
use disentangle::data::synthetic::simplex_blobs;
use disentangle::metrics::{clustering_accuracy_with, ClusteringScores, Matching};

fn main() -> disentangle::Result<()> {
    println!(
        "{:>10} {:>6} {:>6} {:>6} {:>6} {:>6} {:>10}",
        "separation", "acc", "nmi", "ari", "dbi", "sil", "chs"
    );
    for separation in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let data = simplex_blobs(4, 250, 8, separation, 3)?;
        let clusters = kmeans(data.features(), 4, 42)?;
        let s = ClusteringScores::evaluate(data.features(), data.labels(), &clusters.assignments)?;
        let f = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
        println!(
            "{separation:>10} {:>6} {:>6} {:>6} {:>6} {:>6} {:>10}",
            f(s.acc),
            f(s.nmi),
            f(s.ari),
            f(s.dbi),
            f(s.silhouette),
            f(s.chs)
        );
        let hungarian = clustering_accuracy_with(data.labels(), &clusters.assignments, Matching::Hungarian)?;
        assert_eq!(Some(hungarian), s.acc);
    }
    Ok(())
}
