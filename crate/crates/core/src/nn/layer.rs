use ndarray::{s, Array1, Array2, Array3, ArrayView2, Axis};

use super::{Activation, Scalar};
use crate::error::{Error, Result};

/// Fully connected layer computing `act(x W + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<F> {
    /// `fan_in x fan_out`
    pub weights: Array2<F>,
    pub bias: Array1<F>,
    pub activation: Activation,
}

/// 1-D convolution over a signal of `in_channels x length`, flattened
/// channel-major on input and output.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dLayer<F> {
    /// `out_channels x in_channels x kernel_width`
    pub kernels: Array3<F>,
    pub bias: Array1<F>,
    pub stride: usize,
    pub activation: Activation,
}

/// Parameter gradients of one layer, laid out like the layer's own storage.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients<F> {
    pub weights: Vec<F>,
    pub bias: Vec<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer<F> {
    Dense(DenseLayer<F>),
    Conv1d(Conv1dLayer<F>),
}

impl<F: Scalar> DenseLayer<F> {
    pub fn new(weights: Array2<F>, activation: Activation) -> Self {
        let bias = Array1::zeros(weights.ncols());
        DenseLayer {
            weights: weights.as_standard_layout().into_owned(),
            bias,
            activation,
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weights.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.ncols()
    }
}

impl<F: Scalar> Conv1dLayer<F> {
    pub fn new(kernels: Array3<F>, stride: usize, activation: Activation) -> Self {
        assert!(stride >= 1, "stride must be positive");
        let bias = Array1::zeros(kernels.dim().0);
        Conv1dLayer {
            kernels: kernels.as_standard_layout().into_owned(),
            bias,
            stride,
            activation,
        }
    }

    pub fn out_channels(&self) -> usize {
        self.kernels.dim().0
    }

    pub fn in_channels(&self) -> usize {
        self.kernels.dim().1
    }

    pub fn kernel_width(&self) -> usize {
        self.kernels.dim().2
    }

    /// Output length for an input signal of `length` samples.
    pub fn output_length(&self, length: usize) -> Option<usize> {
        (length >= self.kernel_width()).then(|| (length - self.kernel_width()) / self.stride + 1)
    }

    fn signal_length(&self, width: usize) -> Option<usize> {
        let c = self.in_channels();
        width.is_multiple_of(c).then_some(width / c)
    }

    /// Kernel matrix of shape `out_channels x (in_channels * kernel_width)`.
    fn kernel_matrix(&self) -> ArrayView2<'_, F> {
        let (o, c, k) = self.kernels.dim();
        self.kernels
            .view()
            .into_shape_with_order((o, c * k))
            .expect("standard layout")
    }

    /// Patch matrix with one row per (example, output position).
    fn im2col(&self, x: ArrayView2<'_, F>, length: usize, out_len: usize) -> Array2<F> {
        let (c, k) = (self.in_channels(), self.kernel_width());
        let b = x.nrows();
        let mut cols = Array2::zeros((b * out_len, c * k));
        for s in 0..b {
            let row = x.row(s);
            for t in 0..out_len {
                let mut dst = cols.row_mut(s * out_len + t);
                for ch in 0..c {
                    let start = ch * length + t * self.stride;
                    dst.slice_mut(s![ch * k..(ch + 1) * k])
                        .assign(&row.slice(s![start..start + k]));
                }
            }
        }
        cols
    }
}

impl<F: Scalar> Layer<F> {
    pub fn activation(&self) -> Activation {
        match self {
            Layer::Dense(l) => l.activation,
            Layer::Conv1d(l) => l.activation,
        }
    }

    /// Output width for the given input width, or `None` if the input
    /// cannot feed this layer.
    pub fn output_width(&self, input_width: usize) -> Option<usize> {
        match self {
            Layer::Dense(l) => (input_width == l.fan_in()).then_some(l.fan_out()),
            Layer::Conv1d(l) => {
                let len = l.signal_length(input_width)?;
                l.output_length(len).map(|t| t * l.out_channels())
            }
        }
    }

    pub fn parameter_count(&self) -> usize {
        let [w, b] = self.parameters();
        w.len() + b.len()
    }

    pub fn parameters(&self) -> [&[F]; 2] {
        match self {
            Layer::Dense(l) => [
                l.weights.as_slice().expect("standard layout"),
                l.bias.as_slice().expect("contiguous"),
            ],
            Layer::Conv1d(l) => [
                l.kernels.as_slice().expect("standard layout"),
                l.bias.as_slice().expect("contiguous"),
            ],
        }
    }

    pub fn parameters_mut(&mut self) -> [&mut [F]; 2] {
        match self {
            Layer::Dense(l) => [
                l.weights.as_slice_mut().expect("standard layout"),
                l.bias.as_slice_mut().expect("contiguous"),
            ],
            Layer::Conv1d(l) => [
                l.kernels.as_slice_mut().expect("standard layout"),
                l.bias.as_slice_mut().expect("contiguous"),
            ],
        }
    }

    /// Post-activation output for a batch (rows are examples).
    pub fn forward(&self, x: ArrayView2<'_, F>, index: usize) -> Result<Array2<F>> {
        let Some(_) = self.output_width(x.ncols()) else {
            return Err(Error::Dimension(format!(
                "layer {index} cannot take input of width {}",
                x.ncols()
            )));
        };
        let mut z = match self {
            Layer::Dense(l) => x.dot(&l.weights) + &l.bias,
            Layer::Conv1d(l) => {
                let length = l.signal_length(x.ncols()).expect("checked");
                let out_len = l.output_length(length).expect("checked");
                let cols = l.im2col(x, length, out_len);
                let y = cols.dot(&l.kernel_matrix().t()) + &l.bias;
                let b = x.nrows();
                let o = l.out_channels();
                // (b * out_len, o) -> (b, o * out_len), channel-major
                y.into_shape_with_order((b, out_len, o))
                    .expect("row count is b * out_len")
                    .permuted_axes([0, 2, 1])
                    .as_standard_layout()
                    .into_owned()
                    .into_shape_with_order((b, o * out_len))
                    .expect("standard layout")
            }
        };
        self.activation().apply(&mut z);
        Ok(z)
    }

    /// Parameter gradients and (if requested) the gradient with respect to
    /// the layer input, given the gradient with respect to the pre-activation.
    pub fn backward(
        &self,
        input: ArrayView2<'_, F>,
        grad_pre: ArrayView2<'_, F>,
        need_input_grad: bool,
    ) -> (LayerGradients<F>, Option<Array2<F>>) {
        match self {
            Layer::Dense(l) => {
                let dw = input.t().dot(&grad_pre);
                let db = grad_pre.sum_axis(Axis(0));
                let dx = need_input_grad.then(|| grad_pre.dot(&l.weights.t()));
                (
                    LayerGradients {
                        weights: dw.iter().copied().collect(),
                        bias: db.to_vec(),
                    },
                    dx,
                )
            }
            Layer::Conv1d(l) => {
                let b = input.nrows();
                let length = l.signal_length(input.ncols()).expect("forward succeeded");
                let out_len = l.output_length(length).expect("forward succeeded");
                let o = l.out_channels();
                let g = grad_pre
                    .to_owned()
                    .into_shape_with_order((b, o, out_len))
                    .expect("grad matches output")
                    .permuted_axes([0, 2, 1])
                    .as_standard_layout()
                    .into_owned()
                    .into_shape_with_order((b * out_len, o))
                    .expect("standard layout");
                let cols = l.im2col(input, length, out_len);
                let dw = g.t().dot(&cols);
                let db = g.sum_axis(Axis(0));
                let dx = need_input_grad.then(|| {
                    let dcols = g.dot(&l.kernel_matrix());
                    let (c, k) = (l.in_channels(), l.kernel_width());
                    let mut dx = Array2::zeros(input.raw_dim());
                    for s in 0..b {
                        let mut row = dx.row_mut(s);
                        for t in 0..out_len {
                            let src = dcols.row(s * out_len + t);
                            for ch in 0..c {
                                let start = ch * length + t * l.stride;
                                let mut seg = row.slice_mut(s![start..start + k]);
                                seg += &src.slice(s![ch * k..(ch + 1) * k]);
                            }
                        }
                    }
                    dx
                });
                (
                    LayerGradients {
                        weights: dw.iter().copied().collect(),
                        bias: db.to_vec(),
                    },
                    dx,
                )
            }
        }
    }
}
