//! Kernel two-sample machinery: RBF and mixed kernels over flattened
//! sequences, the unbiased MMD^2 estimator, its variance, bandwidth
//! selection by the t-statistic power proxy, and the relative
//! (three-sample) MMD test.

mod bandwidth;
mod estimator;
mod three_sample;
mod variance;

pub use bandwidth::{default_bandwidth_grid, optimize_bandwidth, optimize_bandwidth_mixed};
pub use estimator::{kernel_matrix, median_pairwise_distance, mmd2_unbiased, squared_distances};
pub use three_sample::{three_sample_test, ThreeSampleResult};
pub use variance::{bootstrap_variance, mmd_variance, mmd_with_variance};

use crate::{Error, Result};

/// One or two RBF bandwidths; two means the mixed kernel, the sum of the
/// two RBF kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    bandwidths: Vec<f64>,
}

impl KernelSpec {
    pub fn single(sigma: f64) -> Result<Self> {
        Self::from_bandwidths(vec![sigma])
    }

    pub fn mixed(sigma_a: f64, sigma_b: f64) -> Result<Self> {
        Self::from_bandwidths(vec![sigma_a, sigma_b])
    }

    pub fn from_bandwidths(bandwidths: Vec<f64>) -> Result<Self> {
        if bandwidths.is_empty() || bandwidths.len() > 2 {
            return Err(Error::Config(format!(
                "kernel takes one or two bandwidths, got {}",
                bandwidths.len()
            )));
        }
        if bandwidths.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::Config("kernel bandwidths must be positive".into()));
        }
        Ok(KernelSpec { bandwidths })
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    /// Kernel value for a squared distance.
    #[inline]
    pub fn eval_sq_dist(&self, d2: f64) -> f64 {
        self.bandwidths
            .iter()
            .map(|s| (-d2 / (2.0 * s * s)).exp())
            .sum()
    }

    /// Kernel value between two flattened sequences.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        self.eval_sq_dist(d2)
    }
}

/// MMD^2 estimate with its variance and the power-proxy t-statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmdResult {
    pub mmd2: f64,
    pub variance: f64,
    pub t_stat: f64,
}
