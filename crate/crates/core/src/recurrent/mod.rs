//! Single-layer LSTM with per-time-step outputs, backpropagation through
//! time, per-example gradient extraction, and parameter checkpointing.

mod batch;
mod checkpoint;
mod lstm;
mod per_example;

pub use batch::SequenceBatch;
pub use checkpoint::{read_params, write_params};
pub use lstm::{init_params, lstm_backward, lstm_forward, LstmCache, LstmParams};
pub use per_example::{batch_loss_and_grads, per_example_grads, AttachedLoss};
