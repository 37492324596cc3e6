//! Relative similarity (three-sample) MMD test.
//!
//! With X the generated samples, Y the test set and Z the training set,
//! the statistic MMD^2_u(X, Y) - MMD^2_u(X, Z) is asymptotically normal;
//! a small p-value rejects the hypothesis that X is at least as close to
//! Y as to Z, flagging memorisation of the training set.

use super::estimator::{kernel_matrix, mmd2_from_kernels};
use super::KernelSpec;
use crate::numerics::{Matrix, Tensor3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeSampleResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Standard normal CDF via the complementary error function
/// (Chebyshev-fitted approximation, fractional error below 1.2e-7).
pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587
                                        + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Variance via the exact U-statistic decomposition over (x_i, y_i, z_i)
/// triples; requires equal sample sizes.
fn paired_variance(kyy: &Matrix, kzz: &Matrix, kxy: &Matrix, kxz: &Matrix) -> f64 {
    let m = kxy.rows();
    let mf = m as f64;
    let h = |i: usize, j: usize| {
        kyy.get(i, j) - kzz.get(i, j) - kxy.get(i, j) - kxy.get(j, i)
            + kxz.get(i, j)
            + kxz.get(j, i)
    };
    let mut row_means = vec![0.0; m];
    let mut total = 0.0;
    for i in 0..m {
        let mut acc = 0.0;
        for j in 0..m {
            if i != j {
                acc += h(i, j);
            }
        }
        row_means[i] = acc / (mf - 1.0);
        total += acc;
    }
    let u = total / (mf * (mf - 1.0));

    let mut zeta2 = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let d = h(i, j) - u;
                zeta2 += d * d;
            }
        }
    }
    zeta2 /= mf * (mf - 1.0);

    let raw_zeta1 =
        row_means.iter().map(|r| (r - u) * (r - u)).sum::<f64>() / mf - zeta2 / (mf - 1.0);
    let zeta1 = raw_zeta1.max(0.0);

    4.0 * (mf - 2.0) / (mf * (mf - 1.0)) * zeta1 + 2.0 / (mf * (mf - 1.0)) * zeta2
}

/// First-order (projection) variance for unequal sample sizes.
fn projection_variance(kyy: &Matrix, kzz: &Matrix, kxy: &Matrix, kxz: &Matrix) -> f64 {
    let (m, n, r) = (kxy.rows(), kyy.rows(), kzz.rows());
    let (mf, nf, rf) = (m as f64, n as f64, r as f64);

    let row_sums = |k: &Matrix, skip_diag: bool| -> Vec<f64> {
        (0..k.rows())
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..k.cols() {
                    if !(skip_diag && i == j) {
                        acc += k.get(i, j);
                    }
                }
                acc
            })
            .collect()
    };
    let col_sums = |k: &Matrix| -> Vec<f64> {
        let mut out = vec![0.0; k.cols()];
        for i in 0..k.rows() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += k.get(i, j);
            }
        }
        out
    };

    let kyy_rows = row_sums(kyy, true);
    let kzz_rows = row_sums(kzz, true);
    let kxy_rows = row_sums(kxy, false);
    let kxy_cols = col_sums(kxy);
    let kxz_rows = row_sums(kxz, false);
    let kxz_cols = col_sums(kxz);

    let u_yy = kyy_rows.iter().sum::<f64>() / (nf * (nf - 1.0));
    let u_zz = kzz_rows.iter().sum::<f64>() / (rf * (rf - 1.0));
    let u_xy = kxy_rows.iter().sum::<f64>() / (mf * nf);
    let u_xz = kxz_rows.iter().sum::<f64>() / (mf * rf);

    let mean2 = |v: &[f64], scale: f64| v.iter().map(|x| x * x).sum::<f64>() * scale;
    let t1 = mean2(&kyy_rows, 1.0 / nf.powi(3)) - u_yy * u_yy;
    let t2 = mean2(&kxy_rows, 1.0 / (nf * nf * mf)) - u_xy * u_xy;
    let t3 = mean2(&kxy_cols, 1.0 / (nf * mf * mf)) - u_xy * u_xy;
    let t4 = mean2(&kzz_rows, 1.0 / rf.powi(3)) - u_zz * u_zz;
    let t5 = mean2(&kxz_cols, 1.0 / (rf * mf * mf)) - u_xz * u_xz;
    let t6 = mean2(&kxz_rows, 1.0 / (rf * rf * mf)) - u_xz * u_xz;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let t7 = dot(&kyy_rows, &kxy_cols) / (nf * nf * mf) - u_yy * u_xy;
    let t8 = dot(&kxy_rows, &kxz_rows) / (nf * mf * rf) - u_xy * u_xz;
    let t9 = dot(&kzz_rows, &kxz_cols) / (rf * rf * mf) - u_zz * u_xz;

    4.0 * (t1 / nf + t2 / mf + t3 / nf + t4 / rf + t5 / rf + t6 / mf
        - 2.0 * (t7 / nf + t8 / mf + t9 / rf))
}

/// Tests H0: MMD(X, Y) <= MMD(X, Z) against the memorisation alternative.
pub fn three_sample_test(
    x_syn: &Tensor3,
    y_test: &Tensor3,
    z_train: &Tensor3,
    spec: &KernelSpec,
) -> Result<ThreeSampleResult> {
    let (m, n, r) = (x_syn.n(), y_test.n(), z_train.n());
    let fewest = m.min(n).min(r);
    if fewest < 10 {
        return Err(Error::TooFewSamples {
            need: 10,
            got: fewest,
        });
    }
    let kxx = kernel_matrix(x_syn, x_syn, spec)?;
    let kyy = kernel_matrix(y_test, y_test, spec)?;
    let kzz = kernel_matrix(z_train, z_train, spec)?;
    let kxy = kernel_matrix(x_syn, y_test, spec)?;
    let kxz = kernel_matrix(x_syn, z_train, spec)?;

    let statistic = mmd2_from_kernels(&kxx, &kyy, &kxy) - mmd2_from_kernels(&kxx, &kzz, &kxz);

    let variance = if m == n && n == r {
        paired_variance(&kyy, &kzz, &kxy, &kxz)
    } else {
        projection_variance(&kyy, &kzz, &kxy, &kxz)
    }
    .max(1e-12);

    let p_value = normal_cdf(-statistic / variance.sqrt()).clamp(0.0, 1.0);
    Ok(ThreeSampleResult { statistic, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn gaussian_seqs(n: usize, shift: f64, rng: &mut Rng) -> Tensor3 {
        Tensor3::from_vec(n, 2, 1, (0..n * 2).map(|_| rng.gaussian() + shift).collect()).unwrap()
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.959963985) - 0.975).abs() < 1e-6);
        let tail = normal_cdf(-3.0);
        assert!((tail - 1.3498980316e-3).abs() / 1.35e-3 < 1e-4, "{tail}");
    }

    #[test]
    fn swapping_y_and_z_flips_the_statistic() {
        let mut rng = Rng::new(91);
        let x = gaussian_seqs(30, 0.0, &mut rng);
        let y = gaussian_seqs(30, 0.5, &mut rng);
        let z = gaussian_seqs(30, 1.0, &mut rng);
        let spec = KernelSpec::single(1.5).unwrap();
        let a = three_sample_test(&x, &y, &z, &spec).unwrap();
        let b = three_sample_test(&x, &z, &y, &spec).unwrap();
        assert!((a.statistic + b.statistic).abs() < 1e-12);
    }

    #[test]
    fn memorised_training_set_is_flagged() {
        // X replays Z exactly; Y lives on disjoint support.
        let mut rng = Rng::new(92);
        let z = gaussian_seqs(40, 0.0, &mut rng);
        let y = gaussian_seqs(40, 8.0, &mut rng);
        let x = z.clone();
        let spec = KernelSpec::single(1.0).unwrap();
        let res = three_sample_test(&x, &y, &z, &spec).unwrap();
        assert!(res.p_value < 0.01, "p = {}", res.p_value);
    }

    #[test]
    fn null_rejection_rate_is_calibrated() {
        let spec = KernelSpec::single(1.5).unwrap();
        let mut rejections = 0;
        let trials = 200;
        for seed in 0..trials {
            let mut rng = Rng::new(5000 + seed);
            let x = gaussian_seqs(50, 0.0, &mut rng);
            let y = gaussian_seqs(50, 0.0, &mut rng);
            let z = gaussian_seqs(50, 0.0, &mut rng);
            let res = three_sample_test(&x, &y, &z, &spec).unwrap();
            if res.p_value < 0.05 {
                rejections += 1;
            }
        }
        let frac = rejections as f64 / trials as f64;
        assert!(
            (0.01..=0.12).contains(&frac),
            "null rejection rate {frac} outside [0.01, 0.12]"
        );
    }

    #[test]
    fn unequal_sizes_use_projection_variance() {
        let mut rng = Rng::new(94);
        let x = gaussian_seqs(30, 0.0, &mut rng);
        let y = gaussian_seqs(40, 2.0, &mut rng);
        let z = gaussian_seqs(50, 0.0, &mut rng);
        let spec = KernelSpec::single(1.0).unwrap();
        let res = three_sample_test(&x, &y, &z, &spec).unwrap();
        // X matches Z, far from Y: strongly positive statistic, tiny p.
        assert!(res.statistic > 0.0);
        assert!(res.p_value < 0.05);
    }

    #[test]
    fn too_few_samples_rejected() {
        let mut rng = Rng::new(93);
        let x = gaussian_seqs(5, 0.0, &mut rng);
        let spec = KernelSpec::single(1.0).unwrap();
        assert!(matches!(
            three_sample_test(&x, &x, &x, &spec),
            Err(Error::TooFewSamples { .. })
        ));
    }
}
