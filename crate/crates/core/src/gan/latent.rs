//! Latent noise batches and per-step condition concatenation.

use crate::numerics::{Matrix, Rng, Tensor3};
use crate::{Error, Result};

/// `N x T x m` noise tensor, i.i.d. standard normal across sequences,
/// steps and dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentBatch(pub Tensor3);

/// Fresh latent noise: every time step gets its own independent draw.
pub fn sample_latent(rng: &mut Rng, n: usize, t: usize, m: usize) -> LatentBatch {
    assert!(n >= 1 && t >= 1 && m >= 1);
    let data = rng.gaussian_vec(n * t * m);
    LatentBatch(Tensor3::from_vec(n, t, m, data).expect("shape matches draw count"))
}

/// Appends each sequence's condition row to every one of its time steps:
/// `N x T x k` plus `N x q` gives `N x T x (k+q)`.
pub fn concat_condition(seq: &Tensor3, cond: Option<&Matrix>) -> Result<Tensor3> {
    let cond = match cond {
        None => return Ok(seq.clone()),
        Some(c) if c.cols() == 0 => return Ok(seq.clone()),
        Some(c) => c,
    };
    if cond.rows() != seq.n() {
        return Err(Error::ShapeMismatch(format!(
            "{} condition rows for {} sequences",
            cond.rows(),
            seq.n()
        )));
    }
    let (n, t_len, k) = seq.shape();
    let q = cond.cols();
    let mut out = Tensor3::zeros(n, t_len, k + q);
    for i in 0..n {
        let crow = cond.row(i);
        for t in 0..t_len {
            let dst = out.step_mut(i, t);
            dst[..k].copy_from_slice(seq.step(i, t));
            dst[k..].copy_from_slice(crow);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latent_shape_and_determinism() {
        let a = sample_latent(&mut Rng::new(1), 2, 30, 5);
        assert_eq!(a.0.shape(), (2, 30, 5));
        let b = sample_latent(&mut Rng::new(1), 2, 30, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn latent_column_means_near_zero() {
        let z = sample_latent(&mut Rng::new(2), 1000, 10, 10);
        let total = z.0.data().len() as f64;
        let mean = z.0.data().iter().sum::<f64>() / total;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn no_condition_returns_input_unchanged() {
        let seq = Tensor3::from_vec(1, 2, 1, vec![0.5, -0.5]).unwrap();
        assert_eq!(concat_condition(&seq, None).unwrap(), seq);
        let empty = Matrix::zeros(1, 0);
        assert_eq!(concat_condition(&seq, Some(&empty)).unwrap(), seq);
    }

    #[test]
    fn condition_appended_to_every_step() {
        let seq = Tensor3::from_vec(1, 2, 1, vec![0.1, 0.2]).unwrap();
        let cond = Matrix::from_vec(1, 1, vec![7.0]).unwrap();
        let out = concat_condition(&seq, Some(&cond)).unwrap();
        assert_eq!(out.step(0, 0), &[0.1, 7.0]);
        assert_eq!(out.step(0, 1), &[0.2, 7.0]);
    }

    #[test]
    fn first_channels_recover_input() {
        let mut rng = Rng::new(3);
        let seq = Tensor3::from_vec(3, 4, 2, (0..24).map(|_| rng.gaussian()).collect()).unwrap();
        let cond = Matrix::from_fn(3, 2, |i, j| (i + j) as f64);
        let out = concat_condition(&seq, Some(&cond)).unwrap();
        for i in 0..3 {
            for t in 0..4 {
                assert_eq!(&out.step(i, t)[..2], seq.step(i, t));
            }
        }
    }

    #[test]
    fn row_count_mismatch_rejected() {
        let seq = Tensor3::zeros(2, 2, 1);
        let cond = Matrix::zeros(3, 1);
        assert!(matches!(
            concat_condition(&seq, Some(&cond)),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
