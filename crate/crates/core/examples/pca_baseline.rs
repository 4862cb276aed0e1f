//! The "original features" baseline: project onto the leading principal
//! components, then cluster. Prints how much variance each dimensionality
//! keeps and how the clustering scores change.
//!
//! ```text
//! cargo run --release --example pca_baseline
//! ```

use disentangle::clustering::{kmeans, pca_project};
use disentangle::data::synthetic::simplex_blobs;
use disentangle::metrics::ClusteringScores;

fn main() -> disentangle::Result<()> {
    let data = simplex_blobs(4, 300, 64, 3.0, 5)?;
    let full = pca_project(data.features(), data.dim())?;
    let total: f64 = full.explained_variance.iter().sum();

    for dims in [2, 4, 16, 64] {
        let p = pca_project(data.features(), dims)?;
        let kept: f64 = p.explained_variance.iter().sum::<f64>() / total;
        let clusters = kmeans(p.projected.view(), 4, 42)?;
        let s = ClusteringScores::evaluate(p.projected.view(), data.labels(), &clusters.assignments)?;
        println!(
            "{dims:>3} dims: variance kept {:.3} | acc {:.3} nmi {:.3} dbi {:.3}",
            kept,
            s.acc.unwrap_or(f64::NAN),
            s.nmi.unwrap_or(f64::NAN),
            s.dbi.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
