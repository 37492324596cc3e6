//! Epoch loop: shuffled minibatches, periodic checkpoints with generated
//! samples, and a per-epoch metric log (losses, MMD^2 against validation,
//! and exact log-likelihood when the dataset has one).

use super::engine::{d_loss, discriminate, g_loss, generate, train_step};
use super::latent::sample_latent;
use super::{GanConfig, GanState};
use crate::datasets::write_sequences;
use crate::mmd::{median_pairwise_distance, mmd2_unbiased, KernelSpec};
use crate::numerics::{Rng, Tensor3};
use crate::recurrent::{write_params, SequenceBatch};
use crate::Result;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Hook scoring a generated sample tensor, e.g. exact GP log-likelihood.
pub type LoglikHook<'a> = &'a dyn Fn(&Tensor3) -> Result<f64>;

pub struct TrainOptions<'a> {
    pub out_dir: PathBuf,
    /// Held-out data for the MMD trace and checkpoint samples.
    pub validation: &'a SequenceBatch,
    /// Mean log-likelihood of generated samples under the exact data
    /// density, when the dataset provides one.
    pub loglik: Option<LoglikHook<'a>>,
}

#[derive(Debug, Clone)]
pub struct CheckpointPaths {
    pub epoch: usize,
    pub dir: PathBuf,
}

fn checkpoint(
    state: &GanState,
    out_dir: &Path,
    epoch: usize,
    samples: &SequenceBatch,
) -> Result<CheckpointPaths> {
    let dir = out_dir.join(format!("ckpt_{epoch}"));
    std::fs::create_dir_all(&dir)?;
    write_params(&dir.join("generator.params"), &state.generator)?;
    write_params(&dir.join("discriminator.params"), &state.discriminator)?;
    write_sequences(&dir.join("samples.csv"), samples)?;
    Ok(CheckpointPaths { epoch, dir })
}

/// Validation-sized generated sample with a per-epoch deterministic seed.
fn eval_sample(state: &GanState, epoch: usize, validation: &SequenceBatch) -> Result<SequenceBatch> {
    let mut rng = Rng::new(state.config.seed).substream(0xe7a1 + epoch as u64);
    let z = sample_latent(
        &mut rng,
        validation.n(),
        state.config.seq_len,
        state.config.latent_dim,
    );
    generate(state, &z, validation.conditions.as_ref())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x}"))
}

/// Full training run. Checkpoints are written at epoch 0, every
/// `checkpoint_every` epochs, and at the final epoch; the metric log goes
/// to `metrics.csv` in the output directory.
pub fn train(
    config: &GanConfig,
    train_data: &SequenceBatch,
    options: &TrainOptions,
) -> Result<(GanState, Vec<CheckpointPaths>)> {
    config.validate()?;
    let mut state = GanState::new(config.clone())?;
    std::fs::create_dir_all(&options.out_dir)?;
    let mut log = std::io::BufWriter::new(std::fs::File::create(
        options.out_dir.join("metrics.csv"),
    )?);
    writeln!(log, "epoch,d_loss,g_loss,mmd2,loglik")?;

    // One kernel for the whole trace, from the validation set.
    let trace_kernel = if options.validation.n() >= 2 {
        let med = median_pairwise_distance(&options.validation.data)?;
        if med > 0.0 {
            Some(KernelSpec::single(med)?)
        } else {
            None
        }
    } else {
        None
    };

    let mut checkpoints = Vec::new();
    let log_row = |state: &GanState,
                       epoch: usize,
                       d: Option<f64>,
                       g: Option<f64>|
     -> Result<(SequenceBatch, String)> {
        let sample = eval_sample(state, epoch, options.validation)?;
        let mmd2 = match &trace_kernel {
            Some(k) if sample.n() >= 2 => {
                Some(mmd2_unbiased(&sample.data, &options.validation.data, k)?)
            }
            _ => None,
        };
        let ll = match options.loglik {
            Some(hook) => Some(hook(&sample.data)?),
            None => None,
        };
        let row = format!(
            "{epoch},{},{},{},{}",
            fmt_opt(d),
            fmt_opt(g),
            fmt_opt(mmd2),
            fmt_opt(ll)
        );
        Ok((sample, row))
    };

    // Epoch-0 baseline: losses probed on the first batch, no updates.
    {
        let probe_n = train_data.n().min(config.batch_size);
        let probe = train_data.select(&(0..probe_n).collect::<Vec<_>>());
        let mut probe_rng = Rng::new(config.seed).substream(0x9406);
        let z = sample_latent(&mut probe_rng, probe_n, config.seq_len, config.latent_dim);
        let d0 = {
            let preds_real = discriminate(&state, &probe.data, probe.conditions.as_ref())?;
            let fake = generate(&state, &z, probe.conditions.as_ref())?;
            let preds_fake = discriminate(&state, &fake.data, probe.conditions.as_ref())?;
            d_loss(&preds_real, 1.0) + d_loss(&preds_fake, 0.0)
        };
        let g0 = g_loss(&state, &z, probe.conditions.as_ref())?;
        let (sample, row) = log_row(&state, 0, Some(d0), Some(g0))?;
        writeln!(log, "{row}")?;
        checkpoints.push(checkpoint(&state, &options.out_dir, 0, &sample)?);
    }

    let n = train_data.n();
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 1..=config.epochs {
        state.epoch = epoch;
        state.rng.shuffle(&mut order);
        let mut d_sum = 0.0;
        let mut g_sum = 0.0;
        let mut steps = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch = train_data.select(chunk);
            let m = train_step(&mut state, &batch)?;
            d_sum += m.d_loss_real + m.d_loss_fake;
            g_sum += m.g_loss;
            steps += 1;
        }
        let d_mean = d_sum / steps as f64;
        let g_mean = g_sum / steps as f64;
        let (sample, row) = log_row(&state, epoch, Some(d_mean), Some(g_mean))?;
        writeln!(log, "{row}")?;
        if epoch % config.checkpoint_every == 0 || epoch == config.epochs {
            checkpoints.push(checkpoint(&state, &options.out_dir, epoch, &sample)?);
        }
    }
    log.flush()?;
    Ok((state, checkpoints))
}
