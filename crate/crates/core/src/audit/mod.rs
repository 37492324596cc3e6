//! Memorisation audits for trained generators: reconstruction-error
//! distributions via latent back-projection, a KS two-sample test on
//! those errors, and latent interpolation traces.

mod backproject;
mod ks;
mod recon;

pub use backproject::{
    back_project, back_project_from, interpolation_trace, BackProjectConfig, BackProjection,
    InterpolationTrace,
};
pub use ks::{ks_two_sample, KsResult};
pub use recon::{
    reconstruction_error_test, GanReconstructor, ReconstructionReport, Reconstructor,
};

use crate::mmd::median_pairwise_distance;
use crate::numerics::Tensor3;
use crate::{Error, Result};

/// Median of pairwise Frobenius distances (not squared) between samples;
/// the audit kernel's bandwidth.
pub fn median_heuristic_bandwidth(samples: &Tensor3) -> Result<f64> {
    let med = median_pairwise_distance(samples)?;
    if med <= 0.0 {
        return Err(Error::DegenerateBandwidth);
    }
    Ok(med)
}
