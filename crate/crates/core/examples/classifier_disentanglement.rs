//! Trains the two-hidden-layer classifier with the soft nearest neighbor
//! loss switched off, pulling classes apart (alpha > 0) and pushing them
//! together (alpha < 0), then reports test accuracy and the hidden-layer
//! loss.
//!
//! ```text
//! cargo run --release --example classifier_disentanglement -- [seed] [epochs]
//! ```

use disentangle::data::synthetic::simplex_blobs;
use disentangle::metrics::classification_metrics;
use disentangle::models::{build_ffn_classifier, predict, train_classifier, TrainConfig};

fn main() -> disentangle::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(42, |s| s.parse().expect("seed"));
    let epochs: usize = args.next().map_or(10, |s| s.parse().expect("epochs"));

    let data = simplex_blobs(4, 500, 32, 2.0, 11)?;
    // Rows are already shuffled, so a prefix split is a random split.
    let rows: Vec<usize> = (0..data.len()).collect();
    let (train, test) = (data.select(&rows[..1600]), data.select(&rows[1600..]));

    for alpha in [0.0, 100.0, -100.0] {
        let mut net = build_ffn_classifier::<f32>(train.dim(), 4, seed)?;
        let config = TrainConfig {
            epochs,
            ..TrainConfig::classifier(alpha, seed)
        };
        let history = train_classifier(&mut net, &train, &config)?;
        let scores = classification_metrics(test.labels(), &predict(&net, test.features())?, 4)?;
        let last = history.epochs.last().expect("at least one epoch");
        let per_layer: Vec<String> = last.snnl.iter().map(|t| format!("{:.3}", t.loss)).collect();
        println!(
            "alpha {alpha:>6}: test acc {:.4} f1 {:.4} | ce {:.4} | hidden snnl [{}]",
            scores.accuracy,
            scores.f1_weighted,
            last.primary_loss,
            per_layer.join(", ")
        );
    }
    Ok(())
}
