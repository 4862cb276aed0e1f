//! Feed-forward and 1-D convolutional networks with exact backpropagation.
//!
//! A [`Network`] is a chain of [`Layer`]s. [`Network::forward`] keeps every
//! layer's post-activation output in a [`ForwardRecord`]; [`Network::backward`]
//! sweeps it in reverse, adding any extra loss gradients supplied for hidden
//! layers (the soft nearest neighbor taps) at the layer they belong to.

mod activation;
mod adam;
mod checkpoint;
mod init;
mod layer;
pub mod loss;
mod scalar;

pub use activation::Activation;
pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{read_checkpoint, read_checkpoint_from, write_checkpoint, write_checkpoint_to, CHECKPOINT_MAGIC};
pub use init::{kaiming_init, xavier_init};
pub use layer::{Conv1dLayer, DenseLayer, Layer, LayerGradients};
pub use scalar::Scalar;

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A hidden layer whose output feeds an auxiliary loss. `width` restricts the
/// tap to the first `width` units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tap {
    pub layer: usize,
    pub width: Option<usize>,
}

impl Tap {
    pub fn full(layer: usize) -> Self {
        Tap { layer, width: None }
    }

    pub fn partial(layer: usize, width: usize) -> Self {
        Tap {
            layer,
            width: Some(width),
        }
    }

    /// The tapped columns of a layer output.
    pub fn view<'a, F>(&self, output: &'a Array2<F>) -> ArrayView2<'a, F> {
        match self.width {
            Some(w) => output.slice(s![.., ..w]),
            None => output.view(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<F> {
    input_width: usize,
    layers: Vec<Layer<F>>,
    taps: Vec<Tap>,
    latent_layer: Option<usize>,
}

/// Input and per-layer outputs of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardRecord<F> {
    activations: Vec<Array2<F>>,
}

impl<F> ForwardRecord<F> {
    pub fn input(&self) -> &Array2<F> {
        &self.activations[0]
    }

    /// Post-activation output of layer `index`.
    pub fn layer_output(&self, index: usize) -> &Array2<F> {
        &self.activations[index + 1]
    }

    pub fn output(&self) -> &Array2<F> {
        self.activations.last().expect("record holds the input at least")
    }

    pub fn num_layers(&self) -> usize {
        self.activations.len() - 1
    }
}

/// Loss gradient arriving at the output layer.
#[derive(Debug, Clone)]
pub enum OutputGradient<F> {
    /// With respect to the post-activation output.
    PostActivation(Array2<F>),
    /// With respect to the output pre-activation (fused softmax/logistic losses).
    PreActivation(Array2<F>),
}

/// Gradient of an auxiliary loss with respect to a hidden layer's output.
/// Its column count may be smaller than the layer width for partial taps.
#[derive(Debug, Clone)]
pub struct TapGradient<F> {
    pub layer: usize,
    pub grad: Array2<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub layers: Vec<LayerGradients<F>>,
}

impl<F: Scalar> Gradients<F> {
    /// Flat tensors in the order of [`Network::parameters_mut`].
    pub fn tensors(&self) -> Vec<&[F]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }
}

impl<F: Scalar> Network<F> {
    pub fn new(input_width: usize, layers: Vec<Layer<F>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        let mut width = input_width;
        for (i, layer) in layers.iter().enumerate() {
            width = layer
                .output_width(width)
                .ok_or_else(|| Error::Dimension(format!("layer {i} cannot take input of width {width}")))?;
        }
        Ok(Network {
            input_width,
            layers,
            taps: Vec::new(),
            latent_layer: None,
        })
    }

    pub fn with_taps(mut self, taps: Vec<Tap>) -> Result<Self> {
        let widths = self.layer_widths();
        for tap in &taps {
            let Some(&w) = widths.get(tap.layer) else {
                return Err(Error::InvalidArgument(format!("tap on missing layer {}", tap.layer)));
            };
            if let Some(tw) = tap.width {
                if tw == 0 || tw > w {
                    return Err(Error::InvalidArgument(format!(
                        "tap width {tw} on layer {} of width {w}",
                        tap.layer
                    )));
                }
            }
        }
        self.taps = taps;
        Ok(self)
    }

    pub fn with_latent_layer(mut self, index: usize) -> Result<Self> {
        if index >= self.layers.len() {
            return Err(Error::InvalidArgument(format!("latent layer {index} does not exist")));
        }
        self.latent_layer = Some(index);
        Ok(self)
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn layers(&self) -> &[Layer<F>] {
        &self.layers
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    /// Index of the autoencoder bottleneck, if this network has one.
    pub fn latent_layer(&self) -> Option<usize> {
        self.latent_layer
    }

    /// Output width of every layer.
    pub fn layer_widths(&self) -> Vec<usize> {
        let mut width = self.input_width;
        self.layers
            .iter()
            .map(|l| {
                width = l.output_width(width).expect("validated at construction");
                width
            })
            .collect()
    }

    pub fn output_width(&self) -> usize {
        *self.layer_widths().last().expect("non-empty")
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(Layer::parameter_count).sum()
    }

    pub fn parameter_sizes(&self) -> Vec<usize> {
        self.layers
            .iter()
            .flat_map(|l| l.parameters().map(<[F]>::len))
            .collect()
    }

    pub fn parameters(&self) -> Vec<&[F]> {
        self.layers.iter().flat_map(|l| l.parameters()).collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut [F]> {
        self.layers.iter_mut().flat_map(|l| l.parameters_mut()).collect()
    }

    fn check_input(&self, x: ArrayView2<'_, F>) -> Result<()> {
        if x.ncols() != self.input_width {
            return Err(Error::Dimension(format!(
                "layer 0 expects input width {}, got {}",
                self.input_width,
                x.ncols()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: ArrayView2<'_, F>) -> Result<ForwardRecord<F>> {
        self.check_input(x)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_owned());
        for (i, layer) in self.layers.iter().enumerate() {
            let out = layer.forward(activations[i].view(), i)?;
            activations.push(out);
        }
        Ok(ForwardRecord { activations })
    }

    /// Output of layer `last` without keeping intermediate activations.
    pub fn forward_through(&self, x: ArrayView2<'_, F>, last: usize) -> Result<Array2<F>> {
        self.check_input(x)?;
        let mut h = self.layers[0].forward(x, 0)?;
        for (i, layer) in self.layers.iter().enumerate().take(last + 1).skip(1) {
            h = layer.forward(h.view(), i)?;
        }
        Ok(h)
    }

    pub fn predict(&self, x: ArrayView2<'_, F>) -> Result<Array2<F>> {
        self.forward_through(x, self.layers.len() - 1)
    }

    /// Bottleneck activations of an autoencoder.
    pub fn encode(&self, x: ArrayView2<'_, F>) -> Result<Array2<F>> {
        let latent = self
            .latent_layer
            .ok_or_else(|| Error::InvalidArgument("network has no latent layer".into()))?;
        if x.nrows() == 0 {
            self.check_input(x)?;
            return Ok(Array2::zeros((0, self.layer_widths()[latent])));
        }
        self.forward_through(x, latent)
    }

    pub fn backward(
        &self,
        record: &ForwardRecord<F>,
        output_grad: OutputGradient<F>,
        taps: &[TapGradient<F>],
    ) -> Result<Gradients<F>> {
        let n_layers = self.layers.len();
        if record.num_layers() != n_layers {
            return Err(Error::InvalidArgument(format!(
                "forward record has {} layers, network has {n_layers}",
                record.num_layers()
            )));
        }
        let batch = record.input().nrows();
        let out_dim = record.output().dim();
        let (given_post, given_pre) = match output_grad {
            OutputGradient::PostActivation(g) => (Some(g), None),
            OutputGradient::PreActivation(g) => (None, Some(g)),
        };
        if let Some(g) = given_post.as_ref().or(given_pre.as_ref()) {
            if g.dim() != out_dim {
                return Err(Error::Dimension(format!(
                    "output gradient {:?} vs output {out_dim:?}",
                    g.dim()
                )));
            }
        }
        for tap in taps {
            let Some(out) = record.activations.get(tap.layer + 1) else {
                return Err(Error::InvalidArgument(format!(
                    "tap gradient for missing layer {}",
                    tap.layer
                )));
            };
            if tap.grad.nrows() != batch || tap.grad.ncols() > out.ncols() {
                return Err(Error::Dimension(format!(
                    "tap gradient {:?} on layer {} with output {:?}",
                    tap.grad.dim(),
                    tap.layer,
                    out.dim()
                )));
            }
        }

        let mut grads: Vec<Option<LayerGradients<F>>> = vec![None; n_layers];
        let mut carry = given_post;
        let mut given_pre = given_pre;
        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            let out = &record.activations[l + 1];
            let mut post = carry.take();
            for tap in taps.iter().filter(|t| t.layer == l) {
                let p = post.get_or_insert_with(|| Array2::zeros(out.raw_dim()));
                let w = tap.grad.ncols();
                let mut dst = p.slice_mut(s![.., ..w]);
                dst += &tap.grad;
            }
            let mut grad_pre = post.map(|p| layer.activation().backward(out.view(), p.view()));
            if let Some(pre) = given_pre.take() {
                grad_pre = Some(match grad_pre {
                    Some(g) => g + &pre,
                    None => pre,
                });
            }
            let grad_pre = grad_pre.unwrap_or_else(|| Array2::zeros(out.raw_dim()));
            let (lg, dx) = layer.backward(record.activations[l].view(), grad_pre.view(), l > 0);
            grads[l] = Some(lg);
            carry = dx;
        }
        Ok(Gradients {
            layers: grads.into_iter().map(|g| g.expect("every layer visited")).collect(),
        })
    }

    /// Converts every parameter to another scalar type.
    pub fn cast<G: Scalar>(&self) -> Network<G> {
        let conv = |v: &F| G::cast(v.widen());
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Dense(d) => Layer::Dense(DenseLayer {
                    weights: d.weights.map(conv),
                    bias: d.bias.map(conv),
                    activation: d.activation,
                }),
                Layer::Conv1d(c) => Layer::Conv1d(Conv1dLayer {
                    kernels: c.kernels.map(conv),
                    bias: c.bias.map(conv),
                    stride: c.stride,
                    activation: c.activation,
                }),
            })
            .collect();
        Network {
            input_width: self.input_width,
            layers,
            taps: self.taps.clone(),
            latent_layer: self.latent_layer,
        }
    }
}
