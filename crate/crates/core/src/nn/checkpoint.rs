//! `NNW1` checkpoint format (all fields little-endian):
//!
//! ```text
//! magic "NNW1" | u32 input_width | u32 layer_count
//! per layer:
//!   u8 type (0 dense, 1 conv1d)
//!   dense:  u32 fan_in, u32 fan_out
//!   conv1d: u32 out_channels, u32 in_channels, u32 kernel_width, u32 stride
//!   u8 activation (0 relu, 1 softmax, 2 logistic, 3 identity)
//!   f64 weights (row-major), f64 bias
//! u32 latent_layer (u32::MAX when absent)
//! u32 tap_count, then per tap: u32 layer, u32 width (0 = full layer)
//! ```

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, Array3};

use super::{Activation, Conv1dLayer, DenseLayer, Layer, Network, Scalar, Tap};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"NNW1";

fn u32_of(v: usize) -> std::io::Result<[u8; 4]> {
    u32::try_from(v)
        .map(u32::to_le_bytes)
        .map_err(|_| std::io::Error::other(format!("{v} does not fit in u32")))
}

pub fn write_checkpoint_to<F: Scalar>(net: &Network<F>, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&u32_of(net.input_width())?)?;
    w.write_all(&u32_of(net.layers().len())?)?;
    for layer in net.layers() {
        match layer {
            Layer::Dense(d) => {
                w.write_all(&[0])?;
                w.write_all(&u32_of(d.fan_in())?)?;
                w.write_all(&u32_of(d.fan_out())?)?;
            }
            Layer::Conv1d(c) => {
                w.write_all(&[1])?;
                for v in [c.out_channels(), c.in_channels(), c.kernel_width(), c.stride] {
                    w.write_all(&u32_of(v)?)?;
                }
            }
        }
        w.write_all(&[layer.activation().tag()])?;
        for tensor in layer.parameters() {
            for &v in tensor {
                w.write_all(&v.widen().to_le_bytes())?;
            }
        }
    }
    let latent = net.latent_layer().map_or(u32::MAX, |l| l as u32);
    w.write_all(&latent.to_le_bytes())?;
    w.write_all(&u32_of(net.taps().len())?)?;
    for tap in net.taps() {
        w.write_all(&u32_of(tap.layer)?)?;
        w.write_all(&u32_of(tap.width.unwrap_or(0))?)?;
    }
    Ok(())
}

pub fn write_checkpoint<F: Scalar>(net: &Network<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    let mut w = BufWriter::new(file);
    write_checkpoint_to(net, &mut w).map_err(|e| Error::io(&tmp, e))?;
    w.flush().map_err(|e| Error::io(&tmp, e))?;
    drop(w);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint<F: Scalar>(path: impl AsRef<Path>) -> Result<Network<F>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint_from(BufReader::new(file))
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| Error::Format {
            what: "checkpoint",
            message: format!("truncated while reading {what}: {e}"),
        })?;
        Ok(buf)
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        Ok(u32::from_le_bytes(self.bytes::<4>(what)?) as usize)
    }

    fn floats<F: Scalar>(&mut self, n: usize, what: &str) -> Result<Vec<F>> {
        (0..n)
            .map(|_| {
                let v = f64::from_le_bytes(self.bytes::<8>(what)?);
                if v.is_finite() {
                    Ok(F::cast(v))
                } else {
                    Err(bad(format!("non-finite {what}")))
                }
            })
            .collect()
    }
}

fn bad(message: String) -> Error {
    Error::Format {
        what: "checkpoint",
        message,
    }
}

pub fn read_checkpoint_from<F: Scalar>(r: impl Read) -> Result<Network<F>> {
    let mut r = Reader { inner: r };
    if &r.bytes::<4>("magic")? != CHECKPOINT_MAGIC {
        return Err(bad("missing NNW1 magic".into()));
    }
    let input_width = r.u32("input width")?;
    let count = r.u32("layer count")?;
    let mut layers = Vec::with_capacity(count);
    for i in 0..count {
        let [kind] = r.bytes::<1>("layer type")?;
        let layer = match kind {
            0 => {
                let fan_in = r.u32("fan_in")?;
                let fan_out = r.u32("fan_out")?;
                let [act] = r.bytes::<1>("activation")?;
                let activation =
                    Activation::from_tag(act).ok_or_else(|| bad(format!("layer {i}: activation tag {act}")))?;
                let w = r.floats(fan_in * fan_out, "weights")?;
                let b = r.floats(fan_out, "bias")?;
                Layer::Dense(DenseLayer {
                    weights: Array2::from_shape_vec((fan_in, fan_out), w).expect("sized"),
                    bias: Array1::from(b),
                    activation,
                })
            }
            1 => {
                let out = r.u32("out_channels")?;
                let inc = r.u32("in_channels")?;
                let k = r.u32("kernel_width")?;
                let stride = r.u32("stride")?;
                if stride == 0 || k == 0 || inc == 0 {
                    return Err(bad(format!("layer {i}: zero conv dimension")));
                }
                let [act] = r.bytes::<1>("activation")?;
                let activation =
                    Activation::from_tag(act).ok_or_else(|| bad(format!("layer {i}: activation tag {act}")))?;
                let w = r.floats(out * inc * k, "kernels")?;
                let b = r.floats(out, "bias")?;
                Layer::Conv1d(Conv1dLayer {
                    kernels: Array3::from_shape_vec((out, inc, k), w).expect("sized"),
                    bias: Array1::from(b),
                    stride,
                    activation,
                })
            }
            other => return Err(bad(format!("layer {i}: unknown type tag {other}"))),
        };
        layers.push(layer);
    }
    let mut net = Network::new(input_width, layers)?;
    let latent = u32::from_le_bytes(r.bytes::<4>("latent layer")?);
    if latent != u32::MAX {
        net = net.with_latent_layer(latent as usize)?;
    }
    let tap_count = r.u32("tap count")?;
    let mut taps = Vec::with_capacity(tap_count);
    for _ in 0..tap_count {
        let layer = r.u32("tap layer")?;
        let width = r.u32("tap width")?;
        taps.push(Tap {
            layer,
            width: (width > 0).then_some(width),
        });
    }
    let net = net.with_taps(taps)?;
    let mut rest = [0u8; 1];
    if r.inner.read(&mut rest).map_err(|e| bad(e.to_string()))? != 0 {
        return Err(bad("trailing bytes".into()));
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn round_trip_preserves_everything() {
        let conv = Conv1dLayer::new(
            Array3::from_shape_fn((2, 1, 3), |(a, b, c)| (a + b + c) as f64 * 0.1),
            1,
            Activation::Relu,
        );
        let dense = DenseLayer::new(
            Array2::from_shape_fn((6, 3), |(i, j)| i as f64 - j as f64),
            Activation::Logistic,
        );
        let net = Network::new(5, vec![Layer::Conv1d(conv), Layer::Dense(dense)])
            .unwrap()
            .with_taps(vec![Tap::full(0), Tap::partial(1, 2)])
            .unwrap()
            .with_latent_layer(1)
            .unwrap();
        let mut bytes = Vec::new();
        write_checkpoint_to(&net, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"NNW1");
        let back: Network<f64> = read_checkpoint_from(&bytes[..]).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(read_checkpoint_from::<f64>(&b"NNW0"[..]).is_err());
        let net = Network::new(
            1,
            vec![Layer::Dense(DenseLayer::new(array![[1.0]], Activation::Identity))],
        )
        .unwrap();
        let mut bytes = Vec::new();
        write_checkpoint_to(&net, &mut bytes).unwrap();
        assert!(read_checkpoint_from::<f64>(&bytes[..bytes.len() - 2]).is_err());
    }
}
