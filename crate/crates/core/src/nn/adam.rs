use serde::{Deserialize, Serialize};

use super::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment estimates for every parameter tensor, with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<F> {
    pub config: AdamConfig,
    step: u64,
    first: Vec<Vec<F>>,
    second: Vec<Vec<F>>,
}

impl<F: Scalar> AdamState<F> {
    /// Fresh state for tensors of the given lengths.
    pub fn new(config: AdamConfig, sizes: impl IntoIterator<Item = usize>) -> Self {
        let sizes: Vec<usize> = sizes.into_iter().collect();
        AdamState {
            config,
            step: 0,
            first: sizes.iter().map(|&n| vec![F::zero(); n]).collect(),
            second: sizes.iter().map(|&n| vec![F::zero(); n]).collect(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: Vec<&mut [F]>, grads: Vec<&[F]>) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(Error::Dimension(format!(
                "optimizer tracks {} tensors, got {} parameters and {} gradients",
                self.first.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(&grads).enumerate() {
            if p.len() != self.first[i].len() || g.len() != self.first[i].len() {
                return Err(Error::Dimension(format!("tensor {i} has mismatched length")));
            }
        }
        self.step += 1;
        let c = self.config;
        let t = self.step as i32;
        let b1 = F::cast(c.beta1);
        let b2 = F::cast(c.beta2);
        let one_b1 = F::cast(1.0 - c.beta1);
        let one_b2 = F::cast(1.0 - c.beta2);
        let corr1 = F::cast(1.0 / (1.0 - c.beta1.powi(t)));
        let corr2 = F::cast(1.0 / (1.0 - c.beta2.powi(t)));
        let lr = F::cast(c.lr);
        let eps = F::cast(c.epsilon);
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.first).zip(&mut self.second) {
            for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + one_b1 * g;
                *v = b2 * *v + one_b2 * g * g;
                let m_hat = *m * corr1;
                let v_hat = *v * corr2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
