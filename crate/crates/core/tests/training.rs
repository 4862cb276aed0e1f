//! End-to-end training behavior on small synthetic problems.

use disentangle::data::synthetic::simplex_blobs;
use disentangle::data::{minmax_scale, EmbeddedDataset};
use disentangle::models::{
    autoencoder_taps, build_autoencoder, build_autoencoder_with, build_ffn_classifier, build_mlp_classifier, encode,
    train_autoencoder, train_classifier, DisentangleMode, TrainConfig, TrainHistory, LATENT_DIM,
};
use disentangle::snnl::annealing_temperature;
use disentangle::DEFAULT_SEEDS;
use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn blobs(classes: usize, per_class: usize, dim: usize, separation: f64, seed: u64) -> EmbeddedDataset {
    simplex_blobs(classes, per_class, dim, separation, seed).unwrap()
}

fn scaled_blobs(seed: u64) -> EmbeddedDataset {
    minmax_scale(&blobs(4, 40, 12, 4.0, seed)).unwrap()
}

#[test]
fn autoencoder_memorizes_sixteen_binary_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = Array2::from_shape_fn((16, 8), |_| if rng.random_bool(0.5) { 1.0 } else { 0.0 });
    let data = EmbeddedDataset::new(x, vec![0; 16]).unwrap();
    let mut net = build_autoencoder::<f32>(8, LATENT_DIM, 42).unwrap();
    let config = TrainConfig {
        epochs: 500,
        ..TrainConfig::autoencoder(DisentangleMode::Baseline, 0.0, 42)
    };
    let history = train_autoencoder(&mut net, &data, &config).unwrap();
    let per_dim = history.epochs.last().unwrap().primary_loss / 8.0;
    assert!(per_dim < 0.05, "final BCE per dimension {per_dim}");
}

#[test]
fn four_separable_points_reach_full_accuracy() {
    let x = array![[1.0, 0.2], [0.9, -0.1], [-1.0, 0.1], [-0.8, -0.3]];
    let data = EmbeddedDataset::new(x, vec![0, 0, 1, 1]).unwrap();
    let mut net = build_ffn_classifier::<f64>(2, 2, 7).unwrap();
    let config = TrainConfig {
        epochs: 200,
        ..TrainConfig::classifier(0.0, 7)
    };
    let history = train_classifier(&mut net, &data, &config).unwrap();
    assert!(history.epochs.iter().any(|e| e.train_accuracy == Some(1.0)));
}

#[test]
fn training_is_bitwise_deterministic() {
    let data = blobs(3, 30, 6, 3.0, 1);
    let run = |seed| {
        let mut net = build_mlp_classifier::<f32>(6, &[16, 16], 3, seed).unwrap();
        let config = TrainConfig {
            epochs: 4,
            batch_size: 32,
            ..TrainConfig::classifier(100.0, seed)
        };
        let history = train_classifier(&mut net, &data, &config).unwrap();
        (net, history)
    };
    let (net_a, hist_a) = run(42);
    let (net_b, hist_b) = run(42);
    assert_eq!(net_a, net_b);
    assert_eq!(hist_a.to_jsonl(), hist_b.to_jsonl());
    let (net_c, _) = run(43);
    assert_ne!(net_a, net_c);
}

#[test]
fn epoch_temperatures_follow_the_schedule() {
    let data = blobs(2, 10, 4, 3.0, 2);
    let mut net = build_mlp_classifier::<f64>(4, &[8], 2, 3).unwrap();
    let config = TrainConfig {
        epochs: 12,
        ..TrainConfig::classifier(1.0, 3)
    };
    let history = train_classifier(&mut net, &data, &config).unwrap();
    assert_eq!(history.epochs.len(), 12);
    for (i, rec) in history.epochs.iter().enumerate() {
        assert_eq!(rec.epoch, i);
        assert_eq!(rec.temperature, annealing_temperature(i, &config.schedule));
    }
}

#[test]
fn zero_alpha_records_no_snnl() {
    let data = blobs(2, 10, 4, 3.0, 2);
    let mut net = build_mlp_classifier::<f64>(4, &[8, 8], 2, 3).unwrap();
    let config = TrainConfig {
        epochs: 3,
        ..TrainConfig::classifier(0.0, 3)
    };
    let history = train_classifier(&mut net, &data, &config).unwrap();
    assert!(history.epochs.iter().all(|e| e.snnl.is_empty()));
}

#[test]
fn every_tap_gets_a_series_when_alpha_is_set() {
    let data = blobs(2, 10, 4, 3.0, 2);
    let mut net = build_mlp_classifier::<f64>(4, &[8, 8], 2, 3).unwrap();
    let config = TrainConfig {
        epochs: 2,
        ..TrainConfig::classifier(-100.0, 3)
    };
    let history = train_classifier(&mut net, &data, &config).unwrap();
    for rec in &history.epochs {
        let layers: Vec<usize> = rec.snnl.iter().map(|t| t.layer).collect();
        assert_eq!(layers, vec![0, 1]);
    }
}

#[test]
fn latent_partial_tracks_one_series() {
    let data = scaled_blobs(4);
    let mut net = build_autoencoder_with::<f32>(12, &[16, 16], 8, 5).unwrap();
    let config = TrainConfig {
        epochs: 3,
        latent_tap_width: 6,
        ..TrainConfig::autoencoder(DisentangleMode::LatentPartial, 100.0, 5)
    };
    let history = train_autoencoder(&mut net, &data, &config).unwrap();
    let latent = net.latent_layer().unwrap();
    for rec in &history.epochs {
        assert_eq!(rec.snnl.len(), 1);
        assert_eq!(rec.snnl[0].layer, latent);
    }
    // all_hidden taps every layer but the reconstruction output.
    let taps = autoencoder_taps(&net, DisentangleMode::AllHidden, 6).unwrap();
    assert_eq!(taps.len(), net.layers().len() - 1);
}

#[test]
fn baseline_autoencoder_never_reads_labels() {
    let data = scaled_blobs(6);
    let (x, labels, scaler) = data.clone().into_parts();
    let mut shuffled = labels.clone();
    shuffled.reverse();
    shuffled.rotate_left(7);
    assert_ne!(shuffled, labels);
    let permuted = EmbeddedDataset::new(x, shuffled)
        .unwrap()
        .with_scaler(scaler.unwrap())
        .unwrap();
    let run = |d: &EmbeddedDataset, alpha| {
        let mut net = build_autoencoder_with::<f32>(12, &[16, 16], 8, 9).unwrap();
        let config = TrainConfig {
            epochs: 3,
            batch_size: 32,
            ..TrainConfig::autoencoder(DisentangleMode::Baseline, alpha, 9)
        };
        let history = train_autoencoder(&mut net, d, &config).unwrap();
        (net, history)
    };
    let (a, ha) = run(&data, 0.0);
    let (b, hb) = run(&permuted, 0.0);
    assert_eq!(a, b);
    assert_eq!(ha, hb);
    // Baseline mode with a nonzero alpha still has nothing to tap.
    let (c, _) = run(&permuted, 100.0);
    assert_eq!(a, c);
}

#[test]
fn disentangling_separable_blobs_lowers_snnl_for_every_seed() {
    for seed in DEFAULT_SEEDS {
        let data = blobs(2, 100, 10, 6.0, seed);
        let mut net = build_mlp_classifier::<f32>(10, &[64, 64], 2, seed).unwrap();
        let config = TrainConfig {
            epochs: 10,
            batch_size: 64,
            ..TrainConfig::classifier(100.0, seed)
        };
        let history = train_classifier(&mut net, &data, &config).unwrap();
        let first = history.epochs.first().unwrap().total_snnl();
        let last = history.epochs.last().unwrap().total_snnl();
        assert!(last < first, "seed {seed}: snnl {first} -> {last}");
    }
}

#[test]
fn all_hidden_autoencoder_lowers_snnl_for_every_seed() {
    for seed in DEFAULT_SEEDS {
        let data = scaled_blobs(seed);
        let mut net = build_autoencoder_with::<f32>(12, &[32, 32], 8, seed).unwrap();
        let config = TrainConfig {
            epochs: 10,
            batch_size: 32,
            ..TrainConfig::autoencoder(DisentangleMode::AllHidden, 100.0, seed)
        };
        let history = train_autoencoder(&mut net, &data, &config).unwrap();
        let first = history.epochs.first().unwrap().total_snnl();
        let last = history.epochs.last().unwrap().total_snnl();
        assert!(last < first, "seed {seed}: snnl {first} -> {last}");
    }
}

#[test]
fn classifier_input_errors() {
    let data = blobs(3, 5, 4, 3.0, 1);
    let mut two_outputs = build_mlp_classifier::<f64>(4, &[8], 2, 1).unwrap();
    assert!(train_classifier(&mut two_outputs, &data, &TrainConfig::classifier(0.0, 1)).is_err());

    let one_class = EmbeddedDataset::new(Array2::ones((6, 4)), vec![1; 6]).unwrap();
    let mut net = build_mlp_classifier::<f64>(4, &[8], 2, 1).unwrap();
    assert!(train_classifier(&mut net, &one_class, &TrainConfig::classifier(100.0, 1)).is_err());
    assert!(train_classifier(&mut net, &one_class, &TrainConfig::classifier(0.0, 1)).is_ok());

    let tiny_batch = TrainConfig {
        batch_size: 1,
        ..TrainConfig::classifier(0.0, 1)
    };
    assert!(train_classifier(&mut net, &one_class, &tiny_batch).is_err());
}

#[test]
fn encoding_nothing_gives_an_empty_code_matrix() {
    let net = build_autoencoder_with::<f32>(5, &[7], 3, 1).unwrap();
    let codes = encode(&net, Array2::<f64>::zeros((0, 5)).view()).unwrap();
    assert_eq!(codes.dim(), (0, 3));
    let x = Array2::from_elem((4, 5), 0.3);
    let z = encode(&net, x.view()).unwrap();
    assert_eq!(z, encode(&net, x.view()).unwrap());
    assert!(z.iter().all(|&v| v > 0.0 && v < 1.0));
}

#[test]
fn history_round_trips_through_jsonl() {
    let data = blobs(2, 10, 4, 3.0, 2);
    let mut net = build_mlp_classifier::<f64>(4, &[8], 2, 3).unwrap();
    let config = TrainConfig {
        epochs: 3,
        ..TrainConfig::classifier(10.0, 3)
    };
    let history = train_classifier(&mut net, &data, &config).unwrap();
    let text = history.to_jsonl();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(TrainHistory::from_jsonl(&text).unwrap(), history);
}
