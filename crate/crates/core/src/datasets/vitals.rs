//! Synthetic ICU-style vitals surrogate: four correlated mean-reverting
//! channels with per-patient baselines, a 16-step observed window, a
//! 4-step unobserved continuation, and threshold-crossing task labels.

use crate::numerics::{cholesky, Matrix, Rng, Tensor3};
use crate::recurrent::SequenceBatch;
use crate::{Error, Result};

pub const VITALS_CHANNELS: [&str; 4] = ["spo2", "hr", "rr", "map"];

pub const OBSERVED_STEPS: usize = 16;
pub const CONTINUATION_STEPS: usize = 4;

struct Channel {
    baseline_mean: f64,
    baseline_sd: f64,
    lo: f64,
    hi: f64,
    noise_sd: f64,
    rho: f64,
}

const CHANNELS: [Channel; 4] = [
    // SpO2-like: high baseline, small spread, capped at 100.
    Channel { baseline_mean: 96.6, baseline_sd: 1.3, lo: 85.0, hi: 100.0, noise_sd: 0.55, rho: 0.92 },
    // HR-like.
    Channel { baseline_mean: 85.0, baseline_sd: 12.0, lo: 40.0, hi: 140.0, noise_sd: 2.2, rho: 0.93 },
    // RR-like.
    Channel { baseline_mean: 16.5, baseline_sd: 3.0, lo: 5.0, hi: 35.0, noise_sd: 0.9, rho: 0.90 },
    // MAP-like.
    Channel { baseline_mean: 88.0, baseline_sd: 12.0, lo: 40.0, hi: 140.0, noise_sd: 2.6, rho: 0.91 },
];

/// Innovation correlation across channels (SpO2, HR, RR, MAP).
const INNOVATION_CORR: [[f64; 4]; 4] = [
    [1.00, -0.20, -0.25, 0.00],
    [-0.20, 1.00, 0.35, 0.25],
    [-0.25, 0.35, 1.00, 0.10],
    [0.00, 0.25, 0.10, 1.00],
];

fn normalize(raw: f64, ch: &Channel) -> f64 {
    2.0 * (raw.clamp(ch.lo, ch.hi) - ch.lo) / (ch.hi - ch.lo) - 1.0
}

/// Normalizes a raw-unit threshold into the [-1, 1] channel scale.
pub fn normalized_threshold(channel: usize, raw: f64) -> f64 {
    let ch = &CHANNELS[channel];
    2.0 * (raw - ch.lo) / (ch.hi - ch.lo) - 1.0
}

/// Observed window plus the continuation steps used only for labelling.
#[derive(Debug, Clone)]
pub struct VitalsBatch {
    /// `n x 16 x 4` observed sequences, normalized to [-1, 1].
    pub batch: SequenceBatch,
    /// `n x 4 x 4` continuation window, same normalization.
    pub continuation: Tensor3,
}

/// Draws `n` surrogate patients.
pub fn gen_vitals_surrogate(n: usize, rng: &mut Rng) -> VitalsBatch {
    assert!(n >= 1);
    let corr = Matrix::from_fn(4, 4, |i, j| INNOVATION_CORR[i][j]);
    let l = cholesky(&corr, 0.0).expect("innovation correlation is positive definite");

    let total = OBSERVED_STEPS + CONTINUATION_STEPS;
    let mut observed = Tensor3::zeros(n, OBSERVED_STEPS, 4);
    let mut continuation = Tensor3::zeros(n, CONTINUATION_STEPS, 4);
    let mut eps = vec![0.0; 4];
    for i in 0..n {
        let baselines: Vec<f64> = CHANNELS
            .iter()
            .map(|c| c.baseline_mean + c.baseline_sd * rng.gaussian())
            .collect();
        let mut state = [0.0f64; 4];
        for t in 0..total {
            let white = rng.gaussian_vec(4);
            l.matvec(&white, &mut eps);
            for (c, ch) in CHANNELS.iter().enumerate() {
                state[c] = if t == 0 {
                    // Stationary start of the mean-reverting recursion.
                    baselines[c] + ch.noise_sd / (1.0 - ch.rho * ch.rho).sqrt() * eps[c]
                } else {
                    baselines[c] + ch.rho * (state[c] - baselines[c]) + ch.noise_sd * eps[c]
                };
                let v = normalize(state[c], ch);
                if t < OBSERVED_STEPS {
                    observed.set(i, t, c, v);
                } else {
                    continuation.set(i, t - OBSERVED_STEPS, c, v);
                }
            }
        }
    }
    VitalsBatch {
        batch: SequenceBatch::new(observed),
        continuation,
    }
}

/// Crossing direction for a threshold task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Above,
    Below,
}

/// A binary early-warning task: does the channel cross the threshold at
/// any step of the continuation window?
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub name: String,
    pub channel: usize,
    pub direction: Direction,
    /// Threshold in the normalized [-1, 1] units of the channel.
    pub threshold: f64,
}

impl TaskSpec {
    pub fn new(name: &str, channel: usize, direction: Direction, threshold: f64) -> Self {
        TaskSpec {
            name: name.into(),
            channel,
            direction,
            threshold,
        }
    }
}

/// The seven early-warning tasks over the four channels, thresholds given
/// in raw units and stored normalized.
pub fn default_vitals_tasks() -> Vec<TaskSpec> {
    vec![
        TaskSpec::new("spo2<95", 0, Direction::Below, normalized_threshold(0, 95.0)),
        TaskSpec::new("hr<70", 1, Direction::Below, normalized_threshold(1, 70.0)),
        TaskSpec::new("hr>100", 1, Direction::Above, normalized_threshold(1, 100.0)),
        TaskSpec::new("rr<13", 2, Direction::Below, normalized_threshold(2, 13.0)),
        TaskSpec::new("rr>20", 2, Direction::Above, normalized_threshold(2, 20.0)),
        TaskSpec::new("map<70", 3, Direction::Below, normalized_threshold(3, 70.0)),
        TaskSpec::new("map>110", 3, Direction::Above, normalized_threshold(3, 110.0)),
    ]
}

/// Label 1 iff the channel strictly crosses the threshold at any step of
/// the continuation window.
pub fn threshold_labels(
    batch: &SequenceBatch,
    continuation: Option<&Tensor3>,
    tasks: &[TaskSpec],
) -> Result<Matrix> {
    let continuation = continuation.ok_or(Error::MissingContinuation)?;
    if continuation.n() != batch.n() {
        return Err(Error::ShapeMismatch(format!(
            "{} continuation rows for {} sequences",
            continuation.n(),
            batch.n()
        )));
    }
    for task in tasks {
        if task.channel >= continuation.d() {
            return Err(Error::ShapeMismatch(format!(
                "task {} references channel {} of a {}-channel batch",
                task.name,
                task.channel,
                continuation.d()
            )));
        }
    }
    let mut labels = Matrix::zeros(batch.n(), tasks.len());
    for i in 0..batch.n() {
        for (k, task) in tasks.iter().enumerate() {
            let crossed = (0..continuation.t()).any(|t| {
                let v = continuation.get(i, t, task.channel);
                match task.direction {
                    Direction::Above => v > task.threshold,
                    Direction::Below => v < task.threshold,
                }
            });
            labels.set(i, k, if crossed { 1.0 } else { 0.0 });
        }
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let a = gen_vitals_surrogate(7, &mut Rng::new(300));
        assert_eq!(a.batch.data.shape(), (7, 16, 4));
        assert_eq!(a.continuation.shape(), (7, 4, 4));
        let b = gen_vitals_surrogate(7, &mut Rng::new(300));
        assert_eq!(a.batch.data, b.batch.data);
        assert_eq!(a.continuation, b.continuation);
    }

    #[test]
    fn lag_one_autocorrelation_shows_mean_reversion() {
        let v = gen_vitals_surrogate(10_000, &mut Rng::new(301));
        for c in 0..4 {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for i in 0..v.batch.n() {
                for t in 0..15 {
                    xs.push(v.batch.data.get(i, t, c));
                    ys.push(v.batch.data.get(i, t + 1, c));
                }
            }
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let mut cov = 0.0;
            let mut vx = 0.0;
            let mut vy = 0.0;
            for (x, y) in xs.iter().zip(&ys) {
                cov += (x - mx) * (y - my);
                vx += (x - mx) * (x - mx);
                vy += (y - my) * (y - my);
            }
            let rho = cov / (vx.sqrt() * vy.sqrt());
            assert!(
                rho > 0.5 && rho < 0.999,
                "channel {c} lag-1 autocorrelation {rho}"
            );
        }
    }

    #[test]
    fn default_task_prevalences_in_range() {
        let v = gen_vitals_surrogate(10_000, &mut Rng::new(302));
        let tasks = default_vitals_tasks();
        let labels = threshold_labels(&v.batch, Some(&v.continuation), &tasks).unwrap();
        for (k, task) in tasks.iter().enumerate() {
            let mean: f64 =
                (0..labels.rows()).map(|i| labels.get(i, k)).sum::<f64>() / labels.rows() as f64;
            assert!(
                (0.05..=0.4).contains(&mean),
                "task {} prevalence {mean}",
                task.name
            );
        }
    }

    #[test]
    fn continuation_required() {
        let v = gen_vitals_surrogate(3, &mut Rng::new(303));
        let err = threshold_labels(&v.batch, None, &default_vitals_tasks());
        assert!(matches!(err, Err(Error::MissingContinuation)));
    }

    #[test]
    fn hand_built_labels() {
        // Two sequences, one channel pinned above/below a 0.0 threshold.
        let batch = SequenceBatch::new(Tensor3::zeros(2, 2, 4));
        let mut cont = Tensor3::zeros(2, 4, 4);
        for t in 0..4 {
            cont.set(0, t, 1, 0.5); // stays above
            cont.set(1, t, 1, -0.5); // stays below
        }
        let tasks = vec![
            TaskSpec::new("up", 1, Direction::Above, 0.0),
            TaskSpec::new("down", 1, Direction::Below, 0.0),
        ];
        let labels = threshold_labels(&batch, Some(&cont), &tasks).unwrap();
        assert_eq!(labels.get(0, 0), 1.0);
        assert_eq!(labels.get(0, 1), 0.0);
        assert_eq!(labels.get(1, 0), 0.0);
        assert_eq!(labels.get(1, 1), 1.0);
    }

    #[test]
    fn boundary_is_strict() {
        let batch = SequenceBatch::new(Tensor3::zeros(1, 2, 4));
        let mut cont = Tensor3::zeros(1, 4, 4);
        for t in 0..4 {
            cont.set(0, t, 0, 0.25);
        }
        let tasks = vec![TaskSpec::new("at", 0, Direction::Above, 0.25)];
        let labels = threshold_labels(&batch, Some(&cont), &tasks).unwrap();
        assert_eq!(labels.get(0, 0), 0.0);
    }
}
