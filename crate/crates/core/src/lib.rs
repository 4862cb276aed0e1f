//! Disentangling text representations with the soft nearest neighbor loss.
//!
//! The crate covers the whole experimental pipeline:
//!
//! * [`data`]: text preprocessing, averaged word-vector sentence embeddings,
//!   min-max scaling and the binary embedding cache.
//! * [`snnl`]: the soft nearest neighbor loss over cosine distances, its
//!   analytic gradient and the annealed temperature schedule.
//! * [`nn`]: dense and 1-D convolutional layers, initializers, losses,
//!   backpropagation with hidden-layer gradient taps, Adam, checkpoints.
//! * [`models`]: the feed-forward, convolutional and autoencoder
//!   architectures and their composite-loss training loops.
//! * [`clustering`]: k-means (k-means++ seeding, Lloyd iterations) and PCA.
//! * [`metrics`]: DBI, silhouette, Calinski-Harabasz, NMI, ARI, clustering
//!   accuracy, classification accuracy/F1 and multi-seed reports.
//! * [`cli`]: the `embed`, `train-classifier`, `train-autoencoder` and
//!   `cluster-eval` commands.

pub mod cli;
pub mod clustering;
pub mod data;
pub mod error;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod snnl;

pub use error::{Error, Result};

/// Seeds used for every multi-run experiment.
pub const DEFAULT_SEEDS: [u64; 5] = [42, 1234, 73, 1024, 31415926];
