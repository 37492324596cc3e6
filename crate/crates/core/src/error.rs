//! Shared error type for the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at column {col})")]
    NotPositiveDefinite { col: usize, pivot: f64 },

    #[error("function evaluation was not finite at coordinate {0}")]
    NonFiniteFunction(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("backward cache does not match the given gradients: {0}")]
    StaleCache(String),

    #[error("condition vector required (cond_dim > 0) but none supplied")]
    MissingCondition,

    #[error("non-finite loss at epoch {epoch}: {value}")]
    NonFiniteLoss { epoch: usize, value: f64 },

    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("degenerate bandwidth: median pairwise distance is zero")]
    DegenerateBandwidth,

    #[error("bad magic number {got:#010x}, expected {expected:#010x}")]
    BadMagic { got: u32, expected: u32 },

    #[error("truncated file: {0}")]
    TruncatedFile(String),

    #[error("continuation window required for threshold labels but absent")]
    MissingContinuation,

    #[error("labels contain a single class; AUROC/AUPRC undefined")]
    SingleClassLabels,

    #[error("numerical integration failed to converge: {0}")]
    IntegrationFailure(String),

    #[error("split would leave an empty part: {0}")]
    EmptySplit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
