use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::midranks;
use crate::error::{Error, Result};
use crate::estimators::CrossDivergences;

pub const DEFAULT_K_ANOM: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyScores {
    pub ids: Vec<String>,
    pub score: Vec<f64>,
}

/// Score of each test group = its `k_anom`-th smallest divergence to the
/// training groups. Larger is more anomalous.
pub fn anomaly_scores(w_test_train: &CrossDivergences, k_anom: usize) -> Result<AnomalyScores> {
    let v = &w_test_train.values;
    if k_anom == 0 || k_anom > v.ncols() {
        return Err(Error::Contract(format!(
            "k_anom must be in 1..={}, got {k_anom}",
            v.ncols()
        )));
    }
    let score = (0..v.nrows())
        .map(|t| {
            let mut row: Vec<f64> = v.row(t).iter().copied().collect();
            row.sort_by(f64::total_cmp);
            row[k_anom - 1]
        })
        .collect();
    Ok(AnomalyScores {
        ids: w_test_train.row_ids.clone(),
        score,
    })
}

/// Area under the ROC curve via the Mann-Whitney statistic; tied scores
/// count one half.
pub fn auc(scores: &[f64], anomalous: &[bool]) -> Result<f64> {
    if scores.len() != anomalous.len() {
        return Err(Error::Contract(format!(
            "{} scores for {} flags",
            scores.len(),
            anomalous.len()
        )));
    }
    let pos = anomalous.iter().filter(|&&a| a).count();
    let neg = anomalous.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedAuc(
            "need at least one anomalous and one normal group".into(),
        ));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Contract("scores must be finite".into()));
    }
    let ranks = midranks(scores);
    let rank_sum: f64 = ranks.iter().zip(anomalous).filter(|(_, &a)| a).map(|(r, _)| r).sum();
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos * neg) as f64)
}

/// Train/test split for group anomaly detection: a `train_fraction` share of
/// the normal groups trains; the remaining normals plus up to as many
/// anomalies form the test set. Returns (train, test) indices, ascending.
pub fn anomaly_split(anomalous: &[bool], train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normals: Vec<usize> = (0..anomalous.len()).filter(|&i| !anomalous[i]).collect();
    let mut anomalies: Vec<usize> = (0..anomalous.len()).filter(|&i| anomalous[i]).collect();
    normals.shuffle(&mut rng);
    anomalies.shuffle(&mut rng);
    let n_train = ((normals.len() as f64) * train_fraction).round() as usize;
    let mut train = normals[..n_train].to_vec();
    let mut test = normals[n_train..].to_vec();
    let n_anom = anomalies.len().min(test.len());
    test.extend_from_slice(&anomalies[..n_anom]);
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn kth_order_statistic() {
        let w = CrossDivergences {
            row_ids: vec!["t".into()],
            col_ids: vec!["a".into(), "b".into(), "c".into()],
            values: DMatrix::from_row_slice(1, 3, &[0.3, 0.1, 0.2]),
        };
        assert_eq!(anomaly_scores(&w, 2).unwrap().score, vec![0.2]);
        assert!(matches!(anomaly_scores(&w, 5), Err(Error::Contract(_))));
    }

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&[0.9, 0.8, 0.1, 0.2], &[true, true, false, false]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5; 4], &[true, false, true, false]).unwrap(), 0.5);
        assert_eq!(auc(&[0.7, 0.3, 0.5], &[true, true, false]).unwrap(), 0.5);
        assert!(matches!(auc(&[0.1, 0.2], &[true, true]), Err(Error::UndefinedAuc(_))));
    }

    #[test]
    fn auc_matches_pair_count() {
        let scores = [0.3, 0.3, 0.9, 0.1, 0.5, 0.3, 0.8];
        let flags = [true, false, true, false, false, true, false];
        let (mut wins, mut pairs) = (0.0, 0.0);
        for i in 0..7 {
            for j in 0..7 {
                if flags[i] && !flags[j] {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        assert_eq!(auc(&scores, &flags).unwrap(), wins / pairs);
    }

    #[test]
    fn split_is_balanced() {
        let flags: Vec<bool> = (0..50).map(|i| i >= 40).collect();
        let (train, test) = anomaly_split(&flags, 0.75, 4);
        assert_eq!(train.len(), 30);
        assert!(train.iter().all(|&i| !flags[i]));
        assert_eq!(test.iter().filter(|&&i| flags[i]).count(), 10);
        assert_eq!(test.iter().filter(|&&i| !flags[i]).count(), 10);
    }
}
