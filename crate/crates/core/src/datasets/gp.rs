//! Gaussian-process sequences on an equally spaced grid, with exact
//! log-density scoring under the generating distribution.

use crate::numerics::{cholesky_auto, Matrix, Rng, Tensor3};
use crate::recurrent::SequenceBatch;
use crate::{Error, Result};

/// Zero-mean GP with an RBF kernel sampled on `seq_len` equally spaced
/// points covering [0, 1].
#[derive(Debug, Clone)]
pub struct GpSpec {
    pub seq_len: usize,
    pub lengthscale: f64,
    pub signal_variance: f64,
}

impl Default for GpSpec {
    fn default() -> Self {
        GpSpec {
            seq_len: 30,
            lengthscale: 0.2,
            signal_variance: 1.0,
        }
    }
}

impl GpSpec {
    /// Kernel matrix on the grid.
    pub fn covariance(&self) -> Matrix {
        let t = self.seq_len;
        let grid: Vec<f64> = (0..t)
            .map(|i| {
                if t == 1 {
                    0.0
                } else {
                    i as f64 / (t - 1) as f64
                }
            })
            .collect();
        Matrix::from_fn(t, t, |i, j| {
            let d = grid[i] - grid[j];
            self.signal_variance * (-d * d / (2.0 * self.lengthscale * self.lengthscale)).exp()
        })
    }
}

/// Each sequence is `L xi` with `L` the (jittered) Cholesky factor of the
/// grid covariance and `xi` standard normal.
pub fn gen_gp(spec: &GpSpec, n: usize, rng: &mut Rng) -> Result<SequenceBatch> {
    assert!(n >= 1);
    let t = spec.seq_len;
    let (l, _) = cholesky_auto(&spec.covariance())?;
    let mut data = Tensor3::zeros(n, t, 1);
    let mut draw = vec![0.0; t];
    for i in 0..n {
        let xi = rng.gaussian_vec(t);
        l.matvec(&xi, &mut draw);
        // L is lower-triangular so matvec of the full matrix is exact.
        for (step, &v) in draw.iter().enumerate() {
            data.set(i, step, 0, v);
        }
    }
    Ok(SequenceBatch::new(data))
}

/// Exact multivariate-normal log densities of the sequences under the GP,
/// one value per sequence; the log-determinant comes from the Cholesky
/// factor.
pub fn gp_loglik(spec: &GpSpec, batch: &Tensor3) -> Result<Vec<f64>> {
    let t = spec.seq_len;
    if batch.t() != t || batch.d() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "batch shape {}x{} does not match the {t}-point GP grid",
            batch.t(),
            batch.d()
        )));
    }
    let (l, _) = cholesky_auto(&spec.covariance())?;
    let log_det: f64 = (0..t).map(|i| l.get(i, i).ln()).sum::<f64>() * 2.0;
    let norm_const = log_det + t as f64 * (std::f64::consts::TAU).ln();

    let mut out = Vec::with_capacity(batch.n());
    let mut solved = vec![0.0; t];
    for i in 0..batch.n() {
        let x = batch.example(i);
        // Forward solve L w = x; the quadratic form is |w|^2.
        for r in 0..t {
            let mut acc = x[r];
            for c in 0..r {
                acc -= l.get(r, c) * solved[c];
            }
            solved[r] = acc / l.get(r, r);
        }
        let quad: f64 = solved.iter().map(|v| v * v).sum();
        out.push(-0.5 * (quad + norm_const));
    }
    Ok(out)
}
