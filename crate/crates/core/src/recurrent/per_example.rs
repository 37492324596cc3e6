//! Per-example gradient extraction, required by DP-SGD's clipping step.

use super::lstm::{lstm_backward, lstm_forward, LstmParams};
use crate::numerics::Tensor3;
use crate::Result;

/// Scalar loss attached to the network outputs, defining what the
/// per-example gradients are gradients *of*.
#[derive(Debug, Clone, Copy)]
pub enum AttachedLoss {
    /// Mean over steps and output channels of the binary cross-entropy of
    /// `sigmoid(output)` against a constant target (the discriminator loss
    /// for an all-real or all-fake batch).
    SigmoidBce { target: f64 },
}

const CLAMP_EPS: f64 = 1e-7;

impl AttachedLoss {
    /// Loss value for one example's `T x d_out` outputs.
    pub fn value(&self, outputs: &[f64]) -> f64 {
        match self {
            AttachedLoss::SigmoidBce { target } => {
                let mut acc = 0.0;
                for &a in outputs {
                    let p = (1.0 / (1.0 + (-a).exp())).clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
                    acc -= target * p.ln() + (1.0 - target) * (1.0 - p).ln();
                }
                acc / outputs.len() as f64
            }
        }
    }

    /// Gradient of the loss with respect to the pre-activation outputs.
    pub fn grad(&self, outputs: &[f64], out: &mut [f64]) {
        match self {
            AttachedLoss::SigmoidBce { target } => {
                let scale = 1.0 / outputs.len() as f64;
                for (g, &a) in out.iter_mut().zip(outputs) {
                    let p = 1.0 / (1.0 + (-a).exp());
                    *g = (p - target) * scale;
                }
            }
        }
    }
}

/// One parameter-gradient set per example: entry `i` equals
/// `lstm_backward` run on the batch containing only example `i`,
/// so their mean is the batch gradient.
pub fn per_example_grads(
    params: &LstmParams,
    inputs: &Tensor3,
    loss: AttachedLoss,
) -> Result<Vec<LstmParams>> {
    let (_, t_len, _) = inputs.shape();
    let mut out = Vec::with_capacity(inputs.n());
    for i in 0..inputs.n() {
        let single = Tensor3::from_vec(1, t_len, inputs.d(), inputs.example(i).to_vec())?;
        let (y, cache) = lstm_forward(params, &single)?;
        let mut dy = Tensor3::zeros(1, t_len, params.d_out());
        loss.grad(y.data(), dy.data_mut());
        let (grads, _) = lstm_backward(params, &cache, &dy)?;
        out.push(grads);
    }
    Ok(out)
}

/// Batch loss and batch gradient under the same per-example convention:
/// the loss is the mean of per-example losses.
pub fn batch_loss_and_grads(
    params: &LstmParams,
    inputs: &Tensor3,
    loss: AttachedLoss,
) -> Result<(f64, LstmParams)> {
    let n = inputs.n();
    let (y, cache) = lstm_forward(params, inputs)?;
    let mut total = 0.0;
    let mut dy = Tensor3::zeros(n, inputs.t(), params.d_out());
    for i in 0..n {
        total += loss.value(y.example(i));
        loss.grad(y.example(i), dy.example_mut(i));
    }
    // Per-example grads carry 1/(T d_out); the batch mean adds 1/N.
    for v in dy.data_mut() {
        *v /= n as f64;
    }
    let (grads, _) = lstm_backward(params, &cache, &dy)?;
    Ok((total / n as f64, grads))
}
