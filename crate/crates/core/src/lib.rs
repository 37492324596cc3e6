//! Recurrent (conditional) GANs for real-valued multivariate time series.
//!
//! The crate trains LSTM-based generator/discriminator pairs on sequence
//! batches, evaluates generated data with kernel two-sample statistics (MMD)
//! and train-on-synthetic/test-on-real protocols, audits trained generators
//! for training-set memorisation, and optionally trains the discriminator
//! under differential privacy with a moments-accountant budget ledger.

pub mod audit;
pub mod datasets;
pub mod dp;
pub mod error;
pub mod gan;
pub mod mmd;
pub mod numerics;
pub mod pipeline;
pub mod recurrent;
pub mod tstr;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
