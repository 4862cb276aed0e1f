//! Network architectures and composite-loss training.
//!
//! Both training loops minimize `primary + alpha * sum_taps snnl(tap, labels, T)`
//! where the primary loss is cross entropy (classifiers) or binary cross
//! entropy reconstruction (autoencoders), and `T` follows the annealing
//! schedule, held constant within an epoch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{s, Array2, Array3, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::EmbeddedDataset;
use crate::error::{Error, Result};
use crate::nn::{
    kaiming_init, loss, xavier_init, Activation, AdamConfig, AdamState, Conv1dLayer, DenseLayer, Gradients, Layer,
    Network, OutputGradient, Scalar, Tap, TapGradient,
};
use crate::snnl::{snnl_loss_and_gradient, SnnlBatch, TemperatureSchedule};

pub const FFN_HIDDEN: [usize; 2] = [500, 500];
pub const CNN_DENSE: [usize; 3] = [2048, 1024, 512];
pub const CONV_OUT_CHANNELS: usize = 128;
pub const CONV_KERNEL_WIDTH: usize = 5;
pub const CONV_STRIDE: usize = 1;
pub const AUTOENCODER_HIDDEN: [usize; 3] = [500, 500, 2000];
pub const LATENT_DIM: usize = 128;
pub const LATENT_TAP_WIDTH: usize = 100;

/// Norm floor for cosine distances on hidden activations.
const ACTIVATION_NORM_FLOOR: f64 = 1e-12;
/// Rows per forward pass when encoding or predicting whole datasets.
const INFERENCE_CHUNK: usize = 1024;

/// Which layers of an autoencoder the soft nearest neighbor loss acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisentangleMode {
    /// Reconstruction only; labels are never read.
    Baseline,
    /// Every hidden layer, including the latent code.
    AllHidden,
    /// The first `latent_tap_width` units of the latent code.
    LatentPartial,
}

impl std::str::FromStr for DisentangleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(DisentangleMode::Baseline),
            "all_hidden" | "all-hidden" => Ok(DisentangleMode::AllHidden),
            "latent_partial" | "latent-partial" => Ok(DisentangleMode::LatentPartial),
            other => Err(Error::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub alpha: f64,
    pub schedule: TemperatureSchedule,
    pub mode: DisentangleMode,
    pub latent_tap_width: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// Feed-forward classifier defaults: 30 epochs.
    pub fn classifier(alpha: f64, seed: u64) -> Self {
        TrainConfig {
            lr: 1e-3,
            batch_size: 256,
            epochs: 30,
            alpha,
            schedule: TemperatureSchedule::default(),
            mode: DisentangleMode::AllHidden,
            latent_tap_width: LATENT_TAP_WIDTH,
            seed,
        }
    }

    /// Convolutional classifier defaults: 50 epochs.
    pub fn cnn(alpha: f64, seed: u64) -> Self {
        TrainConfig {
            epochs: 50,
            ..Self::classifier(alpha, seed)
        }
    }

    pub fn autoencoder(mode: DisentangleMode, alpha: f64, seed: u64) -> Self {
        TrainConfig {
            mode,
            ..Self::classifier(alpha, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidArgument("batch size must be at least 2".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate {}", self.lr)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha {}", self.alpha)));
        }
        TemperatureSchedule::new(self.schedule.eta, self.schedule.gamma)?;
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            ..AdamConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TapLoss {
    pub layer: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub temperature: f64,
    /// Example-weighted mean of the primary loss over the epoch's batches.
    pub primary_loss: f64,
    /// Mean soft nearest neighbor loss per tapped layer; empty when the
    /// auxiliary term is off.
    pub snnl: Vec<TapLoss>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub train_accuracy: Option<f64>,
}

impl EpochRecord {
    pub fn total_snnl(&self) -> f64 {
        self.snnl.iter().fold(0.0, |acc, t| acc + t.loss)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.epochs {
            out.push_str(&serde_json::to_string(rec).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let epochs = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                serde_json::from_str(l).map_err(|e| Error::Format {
                    what: "history",
                    message: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(TrainHistory { epochs })
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        w.write_all(self.to_jsonl().as_bytes())
            .map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn dense<F: Scalar>(fan_in: usize, fan_out: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Layer<F> {
    let weights = match activation {
        Activation::Relu => kaiming_init(fan_in, fan_out, rng),
        _ => xavier_init(fan_in, fan_out, rng),
    };
    Layer::Dense(DenseLayer::new(weights, activation))
}

/// ReLU/Kaiming hidden layers followed by a softmax/Xavier output. Every
/// hidden layer is a tap.
pub fn build_mlp_classifier<F: Scalar>(d: usize, hidden: &[usize], k: usize, seed: u64) -> Result<Network<F>> {
    if d == 0 || k == 0 || hidden.contains(&0) {
        return Err(Error::InvalidArgument("layer widths must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(hidden.len() + 1);
    let mut width = d;
    for &h in hidden {
        layers.push(dense(width, h, Activation::Relu, &mut rng));
        width = h;
    }
    layers.push(dense(width, k, Activation::Softmax, &mut rng));
    let taps = (0..hidden.len()).map(Tap::full).collect();
    Network::new(d, layers)?.with_taps(taps)
}

/// `d -> 500 -> 500 -> k`.
pub fn build_ffn_classifier<F: Scalar>(d: usize, k: usize, seed: u64) -> Result<Network<F>> {
    build_mlp_classifier(d, &FFN_HIDDEN, k, seed)
}

/// One 1-D convolution over the embedding (a single-channel signal of length
/// `d`), flattened into dense layers of 2048, 1024 and 512 units.
pub fn build_cnn_classifier<F: Scalar>(d: usize, k: usize, seed: u64) -> Result<Network<F>> {
    build_conv_classifier(d, CONV_OUT_CHANNELS, CONV_KERNEL_WIDTH, &CNN_DENSE, k, seed)
}

pub fn build_conv_classifier<F: Scalar>(
    d: usize,
    channels: usize,
    kernel_width: usize,
    dense_widths: &[usize],
    k: usize,
    seed: u64,
) -> Result<Network<F>> {
    if d < kernel_width {
        return Err(Error::InvalidArgument(format!(
            "input dimension {d} is smaller than the kernel width {kernel_width}"
        )));
    }
    if k == 0 || channels == 0 || kernel_width == 0 || dense_widths.contains(&0) {
        return Err(Error::InvalidArgument("layer widths must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kernels: Array2<F> = kaiming_init(kernel_width, channels, &mut rng);
    let kernels: Array3<F> = kernels
        .t()
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((channels, 1, kernel_width))
        .expect("channels x kernel_width");
    let conv = Conv1dLayer::new(kernels, CONV_STRIDE, Activation::Relu);
    let out_len = conv.output_length(d).expect("d >= kernel width");
    let mut layers = vec![Layer::Conv1d(conv)];
    let mut width = out_len * channels;
    for &h in dense_widths {
        layers.push(dense(width, h, Activation::Relu, &mut rng));
        width = h;
    }
    layers.push(dense(width, k, Activation::Softmax, &mut rng));
    let taps = (0..=dense_widths.len()).map(Tap::full).collect();
    Network::new(d, layers)?.with_taps(taps)
}

/// `d -> 500 -> 500 -> 2000 -> z -> 2000 -> 500 -> 500 -> d`.
pub fn build_autoencoder<F: Scalar>(d: usize, z: usize, seed: u64) -> Result<Network<F>> {
    build_autoencoder_with(d, &AUTOENCODER_HIDDEN, z, seed)
}

/// Autoencoder with the given encoder hidden widths, mirrored in the decoder.
/// Hidden layers are ReLU/Kaiming; the latent and reconstruction layers are
/// logistic/Xavier. Taps cover every layer except the reconstruction.
pub fn build_autoencoder_with<F: Scalar>(d: usize, encoder: &[usize], z: usize, seed: u64) -> Result<Network<F>> {
    if d == 0 || z == 0 || encoder.contains(&0) {
        return Err(Error::InvalidArgument("layer widths must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::new();
    let mut width = d;
    for &h in encoder {
        layers.push(dense(width, h, Activation::Relu, &mut rng));
        width = h;
    }
    layers.push(dense(width, z, Activation::Logistic, &mut rng));
    let latent = layers.len() - 1;
    width = z;
    for &h in encoder.iter().rev() {
        layers.push(dense(width, h, Activation::Relu, &mut rng));
        width = h;
    }
    layers.push(dense(width, d, Activation::Logistic, &mut rng));
    let taps = (0..layers.len() - 1).map(Tap::full).collect();
    Network::new(d, layers)?.with_latent_layer(latent)?.with_taps(taps)
}

/// Taps an autoencoder trains with under `mode`.
pub fn autoencoder_taps<F: Scalar>(net: &Network<F>, mode: DisentangleMode, tap_width: usize) -> Result<Vec<Tap>> {
    let latent = net
        .latent_layer()
        .ok_or_else(|| Error::InvalidArgument("network is not an autoencoder".into()))?;
    Ok(match mode {
        DisentangleMode::Baseline => Vec::new(),
        DisentangleMode::AllHidden => (0..net.layers().len() - 1).map(Tap::full).collect(),
        DisentangleMode::LatentPartial => {
            let z = net.layer_widths()[latent];
            if tap_width == 0 || tap_width > z {
                return Err(Error::InvalidArgument(format!(
                    "latent tap width {tap_width} must be in [1, {z}]"
                )));
            }
            vec![Tap::partial(latent, tap_width)]
        }
    })
}

/// Primary objective of a training run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Softmax output, cross entropy against labels.
    Classify,
    /// Logistic output, binary cross entropy against the input.
    Reconstruct,
}

/// Loss terms of one composite evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeLoss {
    pub primary: f64,
    pub snnl: Vec<TapLoss>,
    pub alpha: f64,
    /// Rows whose argmax matched the label (classification only).
    pub correct: usize,
}

impl CompositeLoss {
    pub fn total(&self) -> f64 {
        self.primary + self.alpha * self.snnl.iter().map(|t| t.loss).sum::<f64>()
    }
}

/// Forward and backward pass of `primary + alpha * sum snnl` on one batch.
/// `labels` may be `None` only when no taps are given and the objective is
/// reconstruction.
pub fn composite_gradients<F: Scalar>(
    net: &Network<F>,
    x: ArrayView2<'_, F>,
    labels: Option<&[usize]>,
    objective: Objective,
    taps: &[Tap],
    alpha: f64,
    temperature: f64,
) -> Result<(CompositeLoss, Gradients<F>)> {
    let record = net.forward(x)?;
    let output = record.output();
    let (primary, grad, correct) = match objective {
        Objective::Classify => {
            let labels = labels.ok_or_else(|| Error::InvalidArgument("classification needs labels".into()))?;
            let y = loss::one_hot::<F>(labels, output.ncols())?;
            let correct = output
                .axis_iter(Axis(0))
                .zip(labels)
                .filter(|(row, &l)| argmax(row.iter().copied()) == l)
                .count();
            (
                loss::cross_entropy(y.view(), output.view())?,
                loss::softmax_cross_entropy_gradient(y.view(), output.view())?,
                correct,
            )
        }
        Objective::Reconstruct => (
            loss::binary_cross_entropy(x, output.view())?,
            loss::logistic_bce_gradient(x, output.view())?,
            0,
        ),
    };

    let mut tap_losses = Vec::new();
    let mut tap_grads = Vec::new();
    if !taps.is_empty() && x.nrows() >= 2 {
        let labels = labels.ok_or_else(|| Error::InvalidArgument("disentanglement needs labels".into()))?;
        for tap in taps {
            let h = tap.view(record.layer_output(tap.layer)).mapv(Scalar::widen);
            let batch = SnnlBatch::new(h.view(), labels, temperature)?.with_norm_floor(ACTIVATION_NORM_FLOOR);
            let (out, g) = snnl_loss_and_gradient(&batch)?;
            tap_losses.push(TapLoss {
                layer: tap.layer,
                loss: out.loss,
            });
            tap_grads.push(TapGradient {
                layer: tap.layer,
                grad: g.mapv(|v| F::cast(alpha * v)),
            });
        }
    }
    let grads = net.backward(&record, OutputGradient::PreActivation(grad), &tap_grads)?;
    Ok((
        CompositeLoss {
            primary,
            snnl: tap_losses,
            alpha,
            correct,
        },
        grads,
    ))
}

fn argmax<F: Scalar>(values: impl Iterator<Item = F>) -> usize {
    let mut best = (0, F::neg_infinity());
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn gather<F: Scalar>(features: ArrayView2<'_, f64>, rows: &[usize]) -> Array2<F> {
    let mut out = Array2::zeros((rows.len(), features.ncols()));
    for (dst, &r) in out.axis_iter_mut(Axis(0)).zip(rows) {
        for (d, &v) in dst.into_iter().zip(features.row(r)) {
            *d = F::cast(v);
        }
    }
    out
}

/// Shuffled example order for `epoch`, derived from `(seed, epoch)` only.
pub fn epoch_order(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64 + 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

fn train_loop<F: Scalar>(
    net: &mut Network<F>,
    data: &EmbeddedDataset,
    config: &TrainConfig,
    objective: Objective,
    taps: &[Tap],
) -> Result<TrainHistory> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training set has no examples".into()));
    }
    let features = data.features();
    let mut adam = AdamState::<F>::new(config.adam(), net.parameter_sizes());
    let n = data.len();
    let mut history = TrainHistory::default();
    let mut batch_labels = Vec::with_capacity(config.batch_size);
    for epoch in 0..config.epochs {
        let temperature = config.schedule.temperature(epoch);
        let order = epoch_order(n, config.seed, epoch);
        let mut primary_sum = 0.0;
        let mut correct = 0usize;
        let mut snnl_sum = vec![0.0; taps.len()];
        let mut snnl_batches = 0usize;
        for rows in order.chunks(config.batch_size) {
            let x = gather::<F>(features, rows);
            let labels = if objective == Objective::Classify || !taps.is_empty() {
                batch_labels.clear();
                batch_labels.extend(rows.iter().map(|&r| data.labels()[r]));
                Some(batch_labels.as_slice())
            } else {
                None
            };
            let (loss, grads) = composite_gradients(net, x.view(), labels, objective, taps, config.alpha, temperature)?;
            primary_sum += loss.primary * rows.len() as f64;
            correct += loss.correct;
            if !loss.snnl.is_empty() {
                snnl_batches += 1;
                for (acc, t) in snnl_sum.iter_mut().zip(&loss.snnl) {
                    *acc += t.loss;
                }
            }
            adam.step(net.parameters_mut(), grads.tensors())?;
        }
        let snnl = if snnl_batches > 0 {
            taps.iter()
                .zip(&snnl_sum)
                .map(|(t, s)| TapLoss {
                    layer: t.layer,
                    loss: s / snnl_batches as f64,
                })
                .collect()
        } else {
            Vec::new()
        };
        history.epochs.push(EpochRecord {
            epoch,
            temperature,
            primary_loss: primary_sum / n as f64,
            snnl,
            train_accuracy: (objective == Objective::Classify).then(|| correct as f64 / n as f64),
        });
    }
    Ok(history)
}

/// Minimizes cross entropy plus `alpha` times the soft nearest neighbor loss
/// on every tap of `net`. With `alpha == 0` the auxiliary term is skipped.
pub fn train_classifier<F: Scalar>(
    net: &mut Network<F>,
    train: &EmbeddedDataset,
    config: &TrainConfig,
) -> Result<TrainHistory> {
    if train.is_empty() {
        return Err(Error::Empty("training set has no examples".into()));
    }
    let k = net.output_width();
    if let Some(&bad) = train.labels().iter().find(|&&l| l >= k) {
        return Err(Error::InvalidArgument(format!(
            "label {bad} but the network has {k} outputs"
        )));
    }
    let taps: Vec<Tap> = if config.alpha != 0.0 {
        if train.num_classes() < 2 {
            return Err(Error::InvalidArgument(
                "disentanglement needs at least two classes in the training set".into(),
            ));
        }
        net.taps().to_vec()
    } else {
        Vec::new()
    };
    train_loop(net, train, config, Objective::Classify, &taps)
}

/// Minimizes binary cross entropy reconstruction plus `alpha` times the soft
/// nearest neighbor loss on the taps selected by `config.mode`.
pub fn train_autoencoder<F: Scalar>(
    net: &mut Network<F>,
    train: &EmbeddedDataset,
    config: &TrainConfig,
) -> Result<TrainHistory> {
    if train.features().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument(
            "autoencoder features must be min-max scaled into [0, 1]".into(),
        ));
    }
    let taps = if config.alpha != 0.0 {
        autoencoder_taps(net, config.mode, config.latent_tap_width)?
    } else {
        autoencoder_taps(net, DisentangleMode::Baseline, config.latent_tap_width)?
    };
    train_loop(net, train, config, Objective::Reconstruct, &taps)
}

fn map_chunks<F: Scalar>(
    x: ArrayView2<'_, f64>,
    out_width: usize,
    f: impl Fn(ArrayView2<'_, F>) -> Result<Array2<F>>,
) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((x.nrows(), out_width));
    let mut start = 0;
    while start < x.nrows() {
        let end = (start + INFERENCE_CHUNK).min(x.nrows());
        let chunk = x.slice(s![start..end, ..]).mapv(F::cast);
        let y = f(chunk.view())?;
        out.slice_mut(s![start..end, ..]).assign(&y.mapv(Scalar::widen));
        start = end;
    }
    Ok(out)
}

/// Latent codes of every row of `x`.
pub fn encode<F: Scalar>(net: &Network<F>, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let latent = net
        .latent_layer()
        .ok_or_else(|| Error::InvalidArgument("network is not an autoencoder".into()))?;
    if x.ncols() != net.input_width() {
        return Err(Error::Dimension(format!(
            "autoencoder expects width {}, got {}",
            net.input_width(),
            x.ncols()
        )));
    }
    let z = net.layer_widths()[latent];
    map_chunks(x, z, |c| net.encode(c))
}

/// Class probabilities for every row of `x`.
pub fn predict_proba<F: Scalar>(net: &Network<F>, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if x.ncols() != net.input_width() {
        return Err(Error::Dimension(format!(
            "network expects width {}, got {}",
            net.input_width(),
            x.ncols()
        )));
    }
    map_chunks(x, net.output_width(), |c| net.predict(c))
}

pub fn predict<F: Scalar>(net: &Network<F>, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
    let p = predict_proba(net, x)?;
    Ok(p.axis_iter(Axis(0)).map(|row| argmax(row.iter().copied())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn ffn_parameter_count() {
        let net = build_ffn_classifier::<f32>(300, 4, 1).unwrap();
        assert_eq!(
            net.parameter_count(),
            (300 * 500 + 500) + (500 * 500 + 500) + (500 * 4 + 4)
        );
        assert_eq!(net.taps(), &[Tap::full(0), Tap::full(1)]);
    }

    #[test]
    fn ffn_forward_shape_and_determinism() {
        let a = build_ffn_classifier::<f64>(12, 4, 9).unwrap();
        let b = build_ffn_classifier::<f64>(12, 4, 9).unwrap();
        assert_eq!(a, b);
        let x = Array2::from_shape_fn((7, 12), |(i, j)| ((i * 12 + j) as f64).sin());
        let p = a.predict(x.view()).unwrap();
        assert_eq!(p.dim(), (7, 4));
        for row in p.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cnn_shapes() {
        let net = build_conv_classifier::<f64>(300, 128, 5, &[8, 8, 8], 4, 3).unwrap();
        assert_eq!(net.layer_widths()[0], 37_888);
        assert_eq!(net.taps().len(), 4);
        let out = build_cnn_classifier::<f32>(300, 4, 3).unwrap();
        assert_eq!(out.layer_widths(), vec![37_888, 2048, 1024, 512, 4]);
        match out.layers().last().unwrap() {
            Layer::Dense(d) => assert!(d.bias.iter().all(|&b| b == 0.0)),
            _ => unreachable!(),
        }
        let small = build_conv_classifier::<f64>(20, 4, 5, &[6, 5, 4], 3, 3).unwrap();
        let x = Array2::from_shape_fn((3, 20), |(i, j)| (i as f64 - j as f64) * 0.1);
        let p = small.predict(x.view()).unwrap();
        assert_eq!(p.dim(), (3, 3));
        assert!(build_cnn_classifier::<f32>(4, 4, 0).is_err());
    }

    #[test]
    fn autoencoder_layout() {
        let net = build_autoencoder::<f32>(300, 128, 0).unwrap();
        assert_eq!(net.layer_widths(), vec![500, 500, 2000, 128, 2000, 500, 500, 300]);
        assert_eq!(net.latent_layer(), Some(3));
        assert_eq!(net.layers()[3].activation(), Activation::Logistic);
        assert_eq!(net.layers()[7].activation(), Activation::Logistic);
        let partial = autoencoder_taps(&net, DisentangleMode::LatentPartial, 100).unwrap();
        assert_eq!(partial, vec![Tap::partial(3, 100)]);
        assert_eq!(
            autoencoder_taps(&net, DisentangleMode::AllHidden, 100).unwrap().len(),
            7
        );
        assert!(autoencoder_taps(&net, DisentangleMode::LatentPartial, 129).is_err());
    }

    #[test]
    fn encode_shapes() {
        let net = build_autoencoder_with::<f64>(6, &[5, 4], 3, 0).unwrap();
        let empty = encode(&net, Array2::zeros((0, 6)).view()).unwrap();
        assert_eq!(empty.dim(), (0, 3));
        let x = array![[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]];
        let z1 = encode(&net, x.view()).unwrap();
        let z2 = encode(&net, x.view()).unwrap();
        assert_eq!(z1, z2);
        assert!(z1.iter().all(|&v| v > 0.0 && v < 1.0));
        let r = net.predict(x.view()).unwrap();
        assert!(r.iter().all(|&v| v > 0.0 && v < 1.0));
        let clf = build_ffn_classifier::<f64>(6, 2, 0).unwrap();
        assert!(encode(&clf, x.view()).is_err());
    }

    #[test]
    fn empty_dataset_rejected() {
        let mut net = build_mlp_classifier::<f64>(2, &[3], 2, 0).unwrap();
        let ds = EmbeddedDataset::new(Array2::zeros((0, 2)), vec![]).unwrap();
        assert!(matches!(
            train_classifier(&mut net, &ds, &TrainConfig::classifier(0.0, 1)),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn autoencoder_rejects_unscaled() {
        let mut net = build_autoencoder_with::<f64>(2, &[3], 2, 0).unwrap();
        let ds = EmbeddedDataset::new(array![[0.5, 3.0], [0.1, 0.2]], vec![0, 1]).unwrap();
        let cfg = TrainConfig::autoencoder(DisentangleMode::Baseline, 0.0, 1);
        assert!(train_autoencoder(&mut net, &ds, &cfg).is_err());
    }

    #[test]
    fn epoch_order_depends_on_seed_and_epoch() {
        assert_eq!(epoch_order(50, 1, 0), epoch_order(50, 1, 0));
        assert_ne!(epoch_order(50, 1, 0), epoch_order(50, 1, 1));
        assert_ne!(epoch_order(50, 1, 0), epoch_order(50, 2, 0));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(
            "latent_partial".parse::<DisentangleMode>().unwrap(),
            DisentangleMode::LatentPartial
        );
        assert!("foo".parse::<DisentangleMode>().is_err());
    }
}
