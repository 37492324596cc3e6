//! RGAN/RCGAN model assembly, adversarial losses, and the training loop.

mod engine;
mod latent;
mod optimizer;
mod train;

pub use engine::{d_loss, discriminate, g_loss, generate, train_step, TrainStepMetrics};
pub use latent::{concat_condition, sample_latent, LatentBatch};
pub use optimizer::{Optimizer, OptimizerKind};
pub use train::{train, CheckpointPaths, TrainOptions};

use crate::numerics::Rng;
use crate::recurrent::{init_params, LstmParams};
use crate::{Error, Result};

/// Shape and schedule of an RGAN (cond_dim = 0) or RCGAN run.
#[derive(Debug, Clone, PartialEq)]
pub struct GanConfig {
    pub latent_dim: usize,
    pub hidden_g: usize,
    pub hidden_d: usize,
    /// 0 means unconditional (RGAN); otherwise the condition width.
    pub cond_dim: usize,
    pub seq_len: usize,
    pub channels: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub d_steps_per_g_step: usize,
    pub epochs: usize,
    pub checkpoint_every: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig {
            latent_dim: 5,
            hidden_g: 100,
            hidden_d: 100,
            cond_dim: 0,
            seq_len: 30,
            channels: 1,
            batch_size: 28,
            learning_rate: 0.1,
            d_steps_per_g_step: 1,
            epochs: 100,
            checkpoint_every: 50,
            optimizer: OptimizerKind::Sgd,
            seed: 0,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("latent_dim", self.latent_dim),
            ("hidden_g", self.hidden_g),
            ("hidden_d", self.hidden_d),
            ("seq_len", self.seq_len),
            ("channels", self.channels),
            ("batch_size", self.batch_size),
            ("d_steps_per_g_step", self.d_steps_per_g_step),
            ("checkpoint_every", self.checkpoint_every),
        ] {
            if v < 1 {
                return Err(Error::Config(format!("{name} must be >= 1, got {v}")));
            }
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning_rate must be a non-negative finite value, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Generator and discriminator parameters plus optimizer slots, the epoch
/// counter, and the training RNG.
#[derive(Debug, Clone)]
pub struct GanState {
    pub config: GanConfig,
    pub generator: LstmParams,
    pub discriminator: LstmParams,
    pub(crate) g_opt: Optimizer,
    pub(crate) d_opt: Optimizer,
    pub epoch: usize,
    pub rng: Rng,
}

impl GanState {
    pub fn new(config: GanConfig) -> Result<Self> {
        config.validate()?;
        let root = Rng::new(config.seed);
        let generator = init_params(
            config.latent_dim + config.cond_dim,
            config.hidden_g,
            config.channels,
            &mut root.substream(1),
        );
        let discriminator = init_params(
            config.channels + config.cond_dim,
            config.hidden_d,
            1,
            &mut root.substream(2),
        );
        let g_opt = Optimizer::new(config.optimizer, generator.n_params());
        let d_opt = Optimizer::new(config.optimizer, discriminator.n_params());
        Ok(GanState {
            config,
            generator,
            discriminator,
            g_opt,
            d_opt,
            epoch: 0,
            rng: root.substream(3),
        })
    }

    /// Rebuilds a state around checkpointed parameters.
    pub fn with_params(
        config: GanConfig,
        generator: LstmParams,
        discriminator: LstmParams,
    ) -> Result<Self> {
        let mut state = GanState::new(config)?;
        if !state.generator.same_shape(&generator)
            || !state.discriminator.same_shape(&discriminator)
        {
            return Err(Error::ShapeMismatch(
                "checkpoint parameters do not match the config".into(),
            ));
        }
        state.generator = generator;
        state.discriminator = discriminator;
        Ok(state)
    }
}
