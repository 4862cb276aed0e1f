//! Trains a baseline and a disentangled autoencoder on overlapping Gaussian
//! blobs, clusters their latent codes with k-means and compares the scores.
//!
//! ```text
//! cargo run --release --example autoencoder_clustering -- [seed] [epochs]
//! ```

use std::time::Instant;

use disentangle::clustering::kmeans;
use disentangle::data::minmax_scale;
use disentangle::data::synthetic::simplex_blobs;
use disentangle::metrics::ClusteringScores;
use disentangle::models::{build_autoencoder, encode, train_autoencoder, DisentangleMode, TrainConfig};

fn main() -> disentangle::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(42, |s| s.parse().expect("seed"));
    let epochs: usize = args.next().map_or(30, |s| s.parse().expect("epochs"));

    // 4 blobs x 500 points in 50 dimensions, centers 1.5 std apart.
    let data = minmax_scale(&simplex_blobs(4, 500, 50, 1.5, 7)?)?;

    for (name, mode, alpha) in [
        ("baseline", DisentangleMode::Baseline, 0.0),
        ("all_hidden", DisentangleMode::AllHidden, 100.0),
    ] {
        let start = Instant::now();
        let mut net = build_autoencoder::<f32>(data.dim(), 16, seed)?;
        let config = TrainConfig {
            epochs,
            ..TrainConfig::autoencoder(mode, alpha, seed)
        };
        let history = train_autoencoder(&mut net, &data, &config)?;
        let z = encode(&net, data.features())?;
        let clusters = kmeans(z.view(), 4, seed)?;
        let scores = ClusteringScores::evaluate(z.view(), data.labels(), &clusters.assignments)?;
        let first = &history.epochs[0];
        let last = history.epochs.last().expect("at least one epoch");
        println!(
            "{name:>10}: acc {:.3} nmi {:.3} ari {:.3} dbi {:.3} | bce {:.3} -> {:.3} snnl {:.3} -> {:.3} | {:.1}s",
            scores.acc.unwrap_or(f64::NAN),
            scores.nmi.unwrap_or(f64::NAN),
            scores.ari.unwrap_or(f64::NAN),
            scores.dbi.unwrap_or(f64::NAN),
            first.primary_loss,
            last.primary_loss,
            first.total_snnl(),
            last.total_snnl(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
