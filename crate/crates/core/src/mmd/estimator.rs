//! Kernel matrices and the unbiased MMD^2 estimator.
//!
//! Sequences are compared as flattened `T x d` vectors under the squared
//! Frobenius norm; the time axis is fixed, so no alignment is needed.

use super::KernelSpec;
use crate::numerics::{Matrix, Tensor3};
use crate::{Error, Result};

/// Pairwise squared Frobenius distances between two sequence sets.
pub fn squared_distances(x: &Tensor3, y: &Tensor3) -> Result<Matrix> {
    if x.t() != y.t() || x.d() != y.d() {
        return Err(Error::ShapeMismatch(format!(
            "sequence shapes {}x{} vs {}x{}",
            x.t(),
            x.d(),
            y.t(),
            y.d()
        )));
    }
    let sq_norm = |t: &Tensor3, i: usize| t.example(i).iter().map(|v| v * v).sum::<f64>();
    let xn: Vec<f64> = (0..x.n()).map(|i| sq_norm(x, i)).collect();
    let yn: Vec<f64> = (0..y.n()).map(|j| sq_norm(y, j)).collect();
    let mut out = Matrix::zeros(x.n(), y.n());
    for i in 0..x.n() {
        let xi = x.example(i);
        let row = out.row_mut(i);
        for (j, o) in row.iter_mut().enumerate() {
            let dot: f64 = xi.iter().zip(y.example(j)).map(|(a, b)| a * b).sum();
            *o = (xn[i] + yn[j] - 2.0 * dot).max(0.0);
        }
    }
    Ok(out)
}

/// `n x m` kernel matrix between two sequence sets.
pub fn kernel_matrix(x: &Tensor3, y: &Tensor3, spec: &KernelSpec) -> Result<Matrix> {
    let mut d2 = squared_distances(x, y)?;
    for v in d2.data_mut() {
        *v = spec.eval_sq_dist(*v);
    }
    Ok(d2)
}

/// Median of pairwise Frobenius distances (not squared) within a sample.
pub fn median_pairwise_distance(samples: &Tensor3) -> Result<f64> {
    let n = samples.n();
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let d2 = squared_distances(samples, samples)?;
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(d2.get(i, j).sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = dists.len();
    Ok(if k % 2 == 1 {
        dists[k / 2]
    } else {
        0.5 * (dists[k / 2 - 1] + dists[k / 2])
    })
}

/// Unbiased MMD^2: diagonal-excluded within-sample means minus twice the
/// cross-sample mean. May be negative.
pub fn mmd2_unbiased(x: &Tensor3, y: &Tensor3, spec: &KernelSpec) -> Result<f64> {
    let (n, m) = (x.n(), y.n());
    if n < 2 || m < 2 {
        return Err(Error::TooFewSamples {
            need: 2,
            got: n.min(m),
        });
    }
    let kxx = kernel_matrix(x, x, spec)?;
    let kyy = kernel_matrix(y, y, spec)?;
    let kxy = kernel_matrix(x, y, spec)?;
    Ok(mmd2_from_kernels(&kxx, &kyy, &kxy))
}

/// The three-sum estimator given precomputed kernel matrices.
pub(crate) fn mmd2_from_kernels(kxx: &Matrix, kyy: &Matrix, kxy: &Matrix) -> f64 {
    let n = kxx.rows();
    let m = kyy.rows();
    let off_diag_sum = |k: &Matrix| {
        let mut acc = 0.0;
        for i in 0..k.rows() {
            for j in 0..k.cols() {
                if i != j {
                    acc += k.get(i, j);
                }
            }
        }
        acc
    };
    let xx = off_diag_sum(kxx) / (n * (n - 1)) as f64;
    let yy = off_diag_sum(kyy) / (m * (m - 1)) as f64;
    let xy = kxy.data().iter().sum::<f64>() * 2.0 / (n * m) as f64;
    xx + yy - xy
}
