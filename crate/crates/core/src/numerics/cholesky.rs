//! Cholesky factorization of symmetric positive-definite matrices.

use super::Matrix;
use crate::{Error, Result};

/// Jitter values tried in turn by [`cholesky_auto`].
pub const JITTER_LADDER: [f64; 7] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5];

const JITTER_MAX: f64 = 1e-4;

/// Lower-triangular `L` with `L L^T = a + jitter*I`.
///
/// `a` must be square and symmetric to 1e-10 relative tolerance; a
/// non-positive pivot yields `NotPositiveDefinite`, signalling the caller
/// to raise the jitter.
pub fn cholesky(a: &Matrix, jitter: f64) -> Result<Matrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let scale = a.frobenius_norm().max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (a.get(i, j) - a.get(j, i)).abs() > 1e-10 * scale {
                return Err(Error::ShapeMismatch(format!(
                    "matrix not symmetric at ({i},{j})"
                )));
            }
        }
    }

    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a.get(j, j) + jitter;
        for k in 0..j {
            let v = l.get(j, k);
            diag -= v * v;
        }
        if diag <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                col: j,
                pivot: diag,
            });
        }
        let dsqrt = diag.sqrt();
        l.set(j, j, dsqrt);
        for i in (j + 1)..n {
            let mut v = a.get(i, j) + if i == j { jitter } else { 0.0 };
            for k in 0..j {
                v -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, v / dsqrt);
        }
    }
    Ok(l)
}

/// Factorizes with the standard jitter ladder, raising the jitter tenfold
/// until the factorization succeeds or the ladder tops out at 1e-4.
/// Returns the factor and the jitter actually used.
pub fn cholesky_auto(a: &Matrix) -> Result<(Matrix, f64)> {
    let mut last = Error::NotPositiveDefinite { col: 0, pivot: 0.0 };
    for &jitter in &JITTER_LADDER {
        match cholesky(a, jitter) {
            Ok(l) => return Ok((l, jitter)),
            Err(e @ Error::NotPositiveDefinite { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    match cholesky(a, JITTER_MAX) {
        Ok(l) => Ok((l, JITTER_MAX)),
        Err(Error::NotPositiveDefinite { .. }) => Err(last),
        Err(e) => Err(e),
    }
}
