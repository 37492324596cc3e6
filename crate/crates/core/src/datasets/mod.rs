//! Toy and surrogate data generators with known ground truth, exact
//! density scoring for GP data, serialized digit images, threshold-label
//! task construction, and the sequence/label CSV formats.

mod csvio;
mod gp;
mod mnist;
mod sine;
mod vitals;

pub use csvio::{read_labels, read_sequences, write_labels, write_sequences};
pub use gp::{gen_gp, gp_loglik, GpSpec};
pub use mnist::{
    load_mnist, serialize_mnist, synthesize_digit_files, synthesize_digits, write_idx_images,
    write_idx_labels, MnistData, SerializeMode,
};
pub use sine::{gen_sine, SineSpec};
pub use vitals::{
    default_vitals_tasks, gen_vitals_surrogate, threshold_labels, Direction, TaskSpec,
    VitalsBatch, VITALS_CHANNELS,
};
