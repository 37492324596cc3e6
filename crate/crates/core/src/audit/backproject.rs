//! Latent back-projection: gradient descent on the latent code so the
//! generator's output best reconstructs a target sequence, under the RBF
//! reconstruction loss `1 - K(G(Z), y)`.

use crate::gan::GanState;
use crate::mmd::KernelSpec;
use crate::numerics::{Matrix, Rng, Tensor3};
use crate::recurrent::{lstm_backward, lstm_forward};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct BackProjectConfig {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
}

impl Default for BackProjectConfig {
    fn default() -> Self {
        BackProjectConfig {
            grad_tol: 1e-3,
            max_iter: 1000,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BackProjection {
    /// Best latent code found, `1 x T x m`.
    pub z_star: Tensor3,
    /// `1 - K(G(z_star), target)` under the audit kernel.
    pub recon_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn single_bandwidth(kernel: &KernelSpec) -> Result<f64> {
    match kernel.bandwidths() {
        [s] => Ok(*s),
        _ => Err(Error::Config(
            "back-projection uses a single-bandwidth kernel".into(),
        )),
    }
}

/// Loss and gradient with respect to the latent code.
fn loss_and_grad(
    state: &GanState,
    z: &Tensor3,
    cond: Option<&Matrix>,
    target: &[f64],
    sigma: f64,
    want_grad: bool,
) -> Result<(f64, Option<Tensor3>)> {
    let inputs = crate::gan::concat_condition(z, cond)?;
    let (pre, cache) = lstm_forward(&state.generator, &inputs)?;
    let mut x = pre.clone();
    for v in x.data_mut() {
        *v = v.tanh();
    }
    let d2: f64 = x
        .data()
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let k = (-d2 / (2.0 * sigma * sigma)).exp();
    let loss = 1.0 - k;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss {
            epoch: 0,
            value: loss,
        });
    }
    if !want_grad {
        return Ok((loss, None));
    }
    // dL/dx = K (x - y) / sigma^2, then back through tanh and the LSTM.
    let mut dpre = Tensor3::zeros(1, z.t(), state.config.channels);
    for (d, (&xv, &yv)) in dpre
        .data_mut()
        .iter_mut()
        .zip(x.data().iter().zip(target))
    {
        *d = k * (xv - yv) / (sigma * sigma) * (1.0 - xv * xv);
    }
    let (_, dinput) = lstm_backward(&state.generator, &cache, &dpre)?;
    // Keep only the latent channels (conditions are fixed inputs).
    let m = state.config.latent_dim;
    let mut dz = Tensor3::zeros(1, z.t(), m);
    for t in 0..z.t() {
        dz.step_mut(0, t).copy_from_slice(&dinput.step(0, t)[..m]);
    }
    Ok((loss, Some(dz)))
}

/// Gradient descent from an explicit starting code, with backtracking
/// halving whenever a step would increase the error; the best-seen code
/// is always kept.
pub fn back_project_from(
    state: &GanState,
    target: &Tensor3,
    cond: Option<&Matrix>,
    kernel: &KernelSpec,
    z_init: Tensor3,
    cfg: &BackProjectConfig,
) -> Result<BackProjection> {
    let sigma = single_bandwidth(kernel)?;
    if target.n() != 1 || target.t() != state.config.seq_len || target.d() != state.config.channels
    {
        return Err(Error::ShapeMismatch(format!(
            "target shape {:?} does not match the generator's {}x{} output",
            target.shape(),
            state.config.seq_len,
            state.config.channels
        )));
    }
    let y = target.example(0);
    let mut z = z_init;
    let (mut loss, mut grad_opt) = loss_and_grad(state, &z, cond, y, sigma, true)?;
    let mut best_z = z.clone();
    let mut best_loss = loss;
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..cfg.max_iter {
        iterations = iter;
        let grad = grad_opt.take().expect("gradient computed each iteration");
        let gnorm = grad.data().iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < cfg.grad_tol {
            converged = true;
            break;
        }
        // Backtracking line search along the negative gradient.
        let mut accepted = false;
        while step > 1e-12 {
            let mut cand = z.clone();
            for (c, g) in cand.data_mut().iter_mut().zip(grad.data()) {
                *c -= step * g;
            }
            let (cand_loss, _) = loss_and_grad(state, &cand, cond, y, sigma, false)?;
            if cand_loss <= loss {
                z = cand;
                loss = cand_loss;
                accepted = true;
                step = (step * 1.5).min(1e3);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // stalled: no descent direction at minimal step
        }
        if loss < best_loss {
            best_loss = loss;
            best_z = z.clone();
        }
        let (l, g) = loss_and_grad(state, &z, cond, y, sigma, true)?;
        loss = l;
        grad_opt = g;
    }

    Ok(BackProjection {
        z_star: best_z,
        recon_error: best_loss,
        iterations,
        converged,
    })
}

/// Multi-restart back-projection from random standard-normal codes,
/// keeping the best reconstruction.
pub fn back_project(
    state: &GanState,
    target: &Tensor3,
    cond: Option<&Matrix>,
    kernel: &KernelSpec,
    rng: &mut Rng,
    cfg: &BackProjectConfig,
) -> Result<BackProjection> {
    let mut best: Option<BackProjection> = None;
    for _ in 0..cfg.restarts.max(1) {
        let z0 = Tensor3::from_vec(
            1,
            state.config.seq_len,
            state.config.latent_dim,
            rng.gaussian_vec(state.config.seq_len * state.config.latent_dim),
        )?;
        let bp = back_project_from(state, target, cond, kernel, z0, cfg)?;
        if best.as_ref().map_or(true, |b| bp.recon_error < b.recon_error) {
            best = Some(bp);
        }
    }
    Ok(best.unwrap())
}

/// Linear interpolation between the back-projections of two targets;
/// returns the generated sample at each interpolation point and its
/// kernel distance from the first endpoint's sample.
pub struct InterpolationTrace {
    /// `steps x T x d` generated samples along the path.
    pub samples: Tensor3,
    pub distances: Vec<f64>,
}

pub fn interpolation_trace(
    state: &GanState,
    target_a: &Tensor3,
    target_b: &Tensor3,
    steps: usize,
    kernel: &KernelSpec,
    rng: &mut Rng,
    cfg: &BackProjectConfig,
) -> Result<InterpolationTrace> {
    if steps < 2 {
        return Err(Error::Config("interpolation needs at least 2 steps".into()));
    }
    let bp_a = back_project(state, target_a, None, kernel, rng, cfg)?;
    let bp_b = back_project(state, target_b, None, kernel, rng, cfg)?;

    let (t_len, d) = (state.config.seq_len, state.config.channels);
    let mut samples = Tensor3::zeros(steps, t_len, d);
    let mut first = Tensor3::zeros(1, t_len, d);
    let mut distances = Vec::with_capacity(steps);
    for s in 0..steps {
        let alpha = s as f64 / (steps - 1) as f64;
        let mut z = bp_a.z_star.clone();
        for (zv, bv) in z.data_mut().iter_mut().zip(bp_b.z_star.data()) {
            *zv = (1.0 - alpha) * *zv + alpha * bv;
        }
        let zb = crate::gan::LatentBatch(z);
        let gen = crate::gan::generate(state, &zb, None)?;
        samples.example_mut(s).copy_from_slice(gen.data.example(0));
        if s == 0 {
            first.example_mut(0).copy_from_slice(gen.data.example(0));
        }
        distances.push(1.0 - kernel.eval(gen.data.example(0), first.example(0)));
    }
    Ok(InterpolationTrace { samples, distances })
}
