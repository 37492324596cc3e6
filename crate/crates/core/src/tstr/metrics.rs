//! Classification metrics: accuracy, AUROC with tie-averaged ranking, and
//! AUPRC as average precision.

use crate::{Error, Result};

/// Fraction of exact matches.
pub fn accuracy(predicted: &[usize], labels: &[usize]) -> f64 {
    assert_eq!(predicted.len(), labels.len());
    let hits = predicted
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    hits as f64 / labels.len() as f64
}

fn check_binary(scores: &[f64], labels: &[f64]) -> Result<(usize, usize)> {
    assert_eq!(scores.len(), labels.len());
    let pos = labels.iter().filter(|&&l| l > 0.5).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClassLabels);
    }
    Ok((pos, neg))
}

/// Area under the ROC curve via the rank-sum formulation with average
/// ranks for tied scores; equals the probability a random positive ranks
/// above a random negative, counting ties as half.
pub fn auroc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    let (pos, neg) = check_binary(scores, labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            j += 1;
        }
        // Average rank of the tie group (1-based ranks i+1..=j).
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            if labels[k] > 0.5 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let pos_f = pos as f64;
    Ok((rank_sum_pos - pos_f * (pos_f + 1.0) / 2.0) / (pos_f * neg as f64))
}

/// Area under the precision-recall curve as average precision: the sum of
/// precision times the recall increment at each distinct threshold, taken
/// in decreasing score order.
pub fn auprc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    let (pos, _) = check_binary(scores, labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..j] {
            if labels[k] > 0.5 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
        }
        let recall = tp / pos as f64;
        let precision = tp / (tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    Ok(ap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn perfectly_separated_scores() {
        let scores = [0.1, 0.2, 0.8, 0.9];
        let labels = [0.0, 0.0, 1.0, 1.0];
        assert_eq!(auroc(&scores, &labels).unwrap(), 1.0);
        assert_eq!(auprc(&scores, &labels).unwrap(), 1.0);
    }

    #[test]
    fn constant_scores_give_half_auroc() {
        let scores = [0.4; 6];
        let labels = [1.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        assert!((auroc(&scores, &labels).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn spec_example_four_points() {
        let scores = [0.1, 0.4, 0.35, 0.8];
        let labels = [0.0, 0.0, 1.0, 1.0];
        assert!((auroc(&scores, &labels).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn single_class_is_an_error() {
        let scores = [0.1, 0.2];
        assert!(matches!(
            auroc(&scores, &[1.0, 1.0]),
            Err(Error::SingleClassLabels)
        ));
        assert!(matches!(
            auprc(&scores, &[0.0, 0.0]),
            Err(Error::SingleClassLabels)
        ));
    }

    /// Brute force: P(score_pos > score_neg) + 0.5 P(tie) over all pairs.
    fn auroc_oracle(scores: &[f64], labels: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            if li <= 0.5 {
                continue;
            }
            for (j, &lj) in labels.iter().enumerate() {
                if lj > 0.5 {
                    continue;
                }
                den += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
        num / den
    }

    #[test]
    fn auroc_matches_pair_counting_oracle_with_ties() {
        let mut rng = Rng::new(500);
        for trial in 0..50 {
            let n = 5 + (trial * 4) % 196;
            // Discretized scores force plenty of ties.
            let scores: Vec<f64> = (0..n)
                .map(|_| (rng.uniform() * 8.0).floor() / 8.0)
                .collect();
            let labels: Vec<f64> = (0..n)
                .map(|_| if rng.bernoulli(0.4) { 1.0 } else { 0.0 })
                .collect();
            match (auroc(&scores, &labels), auroc_oracle(&scores, &labels)) {
                (Ok(fast), oracle) => {
                    assert!((fast - oracle).abs() < 1e-12, "trial {trial}: {fast} vs {oracle}")
                }
                (Err(Error::SingleClassLabels), _) => {}
                (Err(e), _) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn accuracy_counts_fractions() {
        assert_eq!(accuracy(&[0, 1, 2, 1], &[0, 1, 1, 1]), 0.75);
    }
}
