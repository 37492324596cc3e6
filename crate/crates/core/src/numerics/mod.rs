//! Deterministic low-level numerical kernels shared by all modules:
//! seeded RNG with keyed sub-streams, Gaussian sampling, dense matrices,
//! Cholesky factorization, and finite-difference gradient checking.

mod cholesky;
mod finitediff;
mod matrix;
mod rng;

pub use cholesky::{cholesky, cholesky_auto, JITTER_LADDER};
pub use finitediff::finite_diff_grad;
pub use matrix::{Matrix, Tensor3};
pub use rng::{gaussian_sample, Rng};
