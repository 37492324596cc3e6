//! Bandwidth selection by maximizing the t-statistic power proxy.

use super::estimator::median_pairwise_distance;
use super::variance::mmd_with_variance;
use super::KernelSpec;
use crate::numerics::Tensor3;
use crate::{Error, Result};

/// Log-spaced grid of 21 candidates spanning two decades either side of
/// the median pairwise distance of the pooled samples.
pub fn default_bandwidth_grid(x: &Tensor3, y: &Tensor3) -> Result<Vec<f64>> {
    let (n, t, d) = x.shape();
    let mut data = x.data().to_vec();
    data.extend_from_slice(y.data());
    let pooled = Tensor3::from_vec(n + y.n(), t, d, data)?;
    let med = median_pairwise_distance(&pooled)?;
    if med <= 0.0 {
        return Err(Error::DegenerateBandwidth);
    }
    let points = 21usize;
    Ok((0..points)
        .map(|k| med * 10f64.powf(-2.0 + 4.0 * k as f64 / (points - 1) as f64))
        .collect())
}

fn t_stat(x: &Tensor3, y: &Tensor3, spec: &KernelSpec) -> Result<f64> {
    Ok(mmd_with_variance(x, y, spec)?.t_stat)
}

/// Single-bandwidth grid search maximizing the t-statistic; ties break
/// toward the smaller bandwidth.
pub fn optimize_bandwidth(x: &Tensor3, y: &Tensor3, candidates: &[f64]) -> Result<KernelSpec> {
    if candidates.is_empty() {
        return Err(Error::Config("empty bandwidth grid".into()));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best: Option<(f64, KernelSpec)> = None;
    for &sigma in &sorted {
        let spec = KernelSpec::single(sigma)?;
        let t = t_stat(x, y, &spec)?;
        if best.as_ref().map_or(true, |(bt, _)| t > *bt) {
            best = Some((t, spec));
        }
    }
    Ok(best.unwrap().1)
}

/// Mixed-kernel search over all bandwidth pairs on the grid (including
/// equal pairs), maximizing the t-statistic of the summed kernel.
pub fn optimize_bandwidth_mixed(
    x: &Tensor3,
    y: &Tensor3,
    candidates: &[f64],
) -> Result<KernelSpec> {
    if candidates.is_empty() {
        return Err(Error::Config("empty bandwidth grid".into()));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best: Option<(f64, KernelSpec)> = None;
    for i in 0..sorted.len() {
        for j in i..sorted.len() {
            let spec = KernelSpec::mixed(sorted[i], sorted[j])?;
            let t = t_stat(x, y, &spec)?;
            if best.as_ref().map_or(true, |(bt, _)| t > *bt) {
                best = Some((t, spec));
            }
        }
    }
    Ok(best.unwrap().1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn gaussian_seqs(n: usize, shift: f64, rng: &mut Rng) -> Tensor3 {
        Tensor3::from_vec(n, 4, 1, (0..n * 4).map(|_| rng.gaussian() + shift).collect()).unwrap()
    }

    #[test]
    fn single_candidate_is_returned() {
        let mut rng = Rng::new(81);
        let x = gaussian_seqs(20, 0.0, &mut rng);
        let y = gaussian_seqs(20, 1.0, &mut rng);
        let spec = optimize_bandwidth(&x, &y, &[0.7]).unwrap();
        assert_eq!(spec.bandwidths(), &[0.7]);
    }

    #[test]
    fn chosen_bandwidth_is_near_fine_grid_optimum() {
        // Mean-shifted Gaussians: the coarse-grid winner should sit within
        // one coarse step of the best bandwidth on a much finer grid.
        let mut rng = Rng::new(82);
        let x = gaussian_seqs(150, 0.0, &mut rng);
        let y = gaussian_seqs(150, 1.0, &mut rng);
        let coarse: Vec<f64> = (0..9).map(|k| 0.25 * 2f64.powf(k as f64 * 0.75)).collect();
        let fine: Vec<f64> = (0..65).map(|k| 0.25 * 2f64.powf(k as f64 * 0.09375)).collect();
        let coarse_pick = optimize_bandwidth(&x, &y, &coarse).unwrap().bandwidths()[0];
        let fine_pick = optimize_bandwidth(&x, &y, &fine).unwrap().bandwidths()[0];
        let step = 2f64.powf(0.75);
        assert!(
            coarse_pick / fine_pick < step * 1.01 && fine_pick / coarse_pick < step * 1.01,
            "coarse {coarse_pick} vs fine {fine_pick}"
        );
    }

    #[test]
    fn mixed_search_returns_two_bandwidths() {
        let mut rng = Rng::new(83);
        let x = gaussian_seqs(40, 0.0, &mut rng);
        let y = gaussian_seqs(40, 0.5, &mut rng);
        let spec = optimize_bandwidth_mixed(&x, &y, &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(spec.bandwidths().len(), 2);
    }

    #[test]
    fn default_grid_brackets_median_distance() {
        let mut rng = Rng::new(84);
        let x = gaussian_seqs(30, 0.0, &mut rng);
        let y = gaussian_seqs(30, 0.0, &mut rng);
        let grid = default_bandwidth_grid(&x, &y).unwrap();
        assert_eq!(grid.len(), 21);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(grid.last().unwrap() / grid.first().unwrap() > 9e3);
    }
}
