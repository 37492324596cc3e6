//! Central-difference gradients, the oracle for every backward pass here.

use crate::{Error, Result};

/// Central-difference gradient of a scalar function at `x`.
///
/// Coordinate `i` gets `(f(x + h e_i) - f(x - h e_i)) / (2h)`. Errs with
/// `NonFiniteFunction` if any evaluation is NaN or infinite.
pub fn finite_diff_grad(
    mut f: impl FnMut(&[f64]) -> f64,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe);
        probe[i] = orig - h;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFiniteFunction(i));
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_matches_analytic() {
        let g = finite_diff_grad(|x| x[0] * x[0], &[3.0], 1e-5).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let g = finite_diff_grad(|_| 2.5, &[1.0, -4.0, 0.3], 1e-5).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn quadratic_form_matches_two_a_x() {
        // f(x) = x^T A x with symmetric A; grad = 2 A x.
        let a = [[2.0, 0.5, -1.0], [0.5, 3.0, 0.25], [-1.0, 0.25, 1.5]];
        let x = [0.7, -1.2, 2.0];
        let f = |v: &[f64]| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += v[i] * a[i][j] * v[j];
                }
            }
            s
        };
        let g = finite_diff_grad(f, &x, 1e-5).unwrap();
        for i in 0..3 {
            let expect: f64 = 2.0 * (0..3).map(|j| a[i][j] * x[j]).sum::<f64>();
            assert!((g[i] - expect).abs() < 1e-5, "coord {i}");
        }
    }

    #[test]
    fn non_finite_evaluation_is_reported() {
        let res = finite_diff_grad(|x| x[0].ln(), &[0.0], 1e-5);
        assert!(matches!(res, Err(Error::NonFiniteFunction(0))));
    }
}
