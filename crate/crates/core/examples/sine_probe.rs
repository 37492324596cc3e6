//! Scratch harness: how fast does the RGAN close the MMD gap on sines?
//! Run: cargo run --release -p rganforge --example sine_probe -- [epochs] [hidden] [batch] [lr]

use rganforge::datasets::{gen_sine, SineSpec};
use rganforge::gan::{train, GanConfig, OptimizerKind, TrainOptions};
use rganforge::mmd::{mmd2_unbiased, KernelSpec};
use rganforge::numerics::{Rng, Tensor3};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args.get(1).map_or(15, |s| s.parse().unwrap());
    let hidden: usize = args.get(2).map_or(32, |s| s.parse().unwrap());
    let batch: usize = args.get(3).map_or(64, |s| s.parse().unwrap());
    let lr: f64 = args.get(4).map_or(1e-3, |s| s.parse().unwrap());
    let n_train: usize = args.get(5).map_or(3000, |s| s.parse().unwrap());

    let mut rng = Rng::new(42);
    let train_data = gen_sine(&SineSpec::default(), n_train, &mut rng);
    let val = gen_sine(&SineSpec::default(), 500, &mut rng);
    let heldout = gen_sine(&SineSpec::default(), 500, &mut rng);

    let config = GanConfig {
        latent_dim: 5,
        hidden_g: hidden,
        hidden_d: hidden,
        seq_len: 30,
        channels: 1,
        batch_size: batch,
        learning_rate: lr,
        epochs,
        checkpoint_every: 1000,
        optimizer: OptimizerKind::adam(),
        seed: 7,
        ..GanConfig::default()
    };

    let dir = std::env::temp_dir().join("sine_probe");
    let opts = TrainOptions {
        out_dir: dir.clone(),
        validation: &val,
        loglik: None,
    };
    let start = std::time::Instant::now();
    let (state, _) = train(&config, &train_data, &opts).unwrap();
    let train_time = start.elapsed();

    // Final MMD^2 between 500 generated and 500 held-out real, vs the
    // white-noise yardstick, under several kernel choices.
    let mut eval_rng = Rng::new(1234);
    let z = rganforge::gan::sample_latent(&mut eval_rng, 500, 30, config.latent_dim);
    let gen = rganforge::gan::generate(&state, &z, None).unwrap();

    let var = heldout.data.data().iter().map(|v| v * v).sum::<f64>()
        / heldout.data.data().len() as f64;
    let noise = Tensor3::from_vec(
        500,
        30,
        1,
        (0..500 * 30)
            .map(|_| eval_rng.gaussian() * var.sqrt())
            .collect(),
    )
    .unwrap();

    let med = rganforge::mmd::median_pairwise_distance(&heldout.data).unwrap();
    let z_val = rganforge::gan::sample_latent(&mut eval_rng, val.n(), 30, config.latent_dim);
    let gen_val = rganforge::gan::generate(&state, &z_val, None).unwrap();
    let grid = rganforge::mmd::default_bandwidth_grid(&gen_val.data, &val.data).unwrap();
    let optimized =
        rganforge::mmd::optimize_bandwidth_mixed(&gen_val.data, &val.data, &grid).unwrap();

    println!(
        "epochs={epochs} hidden={hidden} batch={batch} lr={lr} n={n_train}: {:.1?} train",
        train_time
    );
    for (name, kernel) in [
        ("single med ", KernelSpec::single(med).unwrap()),
        ("mixed med/2", KernelSpec::mixed(med, med / 2.0).unwrap()),
        ("optimized  ", optimized),
    ] {
        let mmd_gen = mmd2_unbiased(&gen.data, &heldout.data, &kernel).unwrap();
        let mmd_noise = mmd2_unbiased(&noise.clone(), &heldout.data, &kernel).unwrap();
        println!(
            "  {name} bw={:?}: mmd_gen={mmd_gen:.5}, mmd_noise={mmd_noise:.5}, ratio={:.4}",
            kernel
                .bandwidths()
                .iter()
                .map(|b| (b * 100.0).round() / 100.0)
                .collect::<Vec<_>>(),
            mmd_gen / mmd_noise
        );
    }
    let metrics = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
    for line in metrics.lines().take(4) {
        println!("  {line}");
    }
    for line in metrics.lines().skip(epochs.saturating_sub(2) + 1) {
        println!("  {line}");
    }
}
