use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::{CrossDivergences, DivergenceMatrix};

pub const DEFAULT_K_VOTE: usize = 11;

/// Majority vote among the `k_vote` training groups with the smallest
/// divergence. Vote ties go to the label with the smaller mean divergence
/// among its voters, then to the lexicographically smaller label.
pub fn knn_classify<S: AsRef<str>>(
    w_test_train: &CrossDivergences,
    train_labels: &[S],
    k_vote: usize,
) -> Result<Vec<String>> {
    let n_train = w_test_train.values.ncols();
    if train_labels.len() != n_train {
        return Err(Error::Contract(format!(
            "{} training labels for {n_train} training groups",
            train_labels.len()
        )));
    }
    if k_vote == 0 || k_vote > n_train {
        return Err(Error::Contract(format!(
            "k_vote must be in 1..={n_train}, got {k_vote}"
        )));
    }
    let v = &w_test_train.values;
    Ok((0..v.nrows())
        .map(|t| {
            let mut order: Vec<usize> = (0..n_train).collect();
            order.sort_by(|&a, &b| v[(t, a)].total_cmp(&v[(t, b)]).then(a.cmp(&b)));
            let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
            for &j in &order[..k_vote] {
                let e = tally.entry(train_labels[j].as_ref()).or_insert((0, 0.0));
                e.0 += 1;
                e.1 += v[(t, j)];
            }
            // BTreeMap iterates labels in lexicographic order, so the first
            // best candidate wins the final tie-break
            let mut best: Option<(&str, usize, f64)> = None;
            for (label, (count, sum)) in tally {
                let mean = sum / count as f64;
                let better = match best {
                    None => true,
                    Some((_, bc, bm)) => count > bc || (count == bc && mean < bm),
                };
                if better {
                    best = Some((label, count, mean));
                }
            }
            best.expect("k_vote >= 1").0.to_string()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub ids: Vec<String>,
    pub truth: Vec<String>,
    pub predicted: Vec<String>,
    pub fold: Vec<usize>,
    pub accuracy: f64,
}

/// `folds`-fold cross-validation of [`knn_classify`] on a full pairwise
/// matrix. Groups are shuffled with `seed` and dealt round-robin into folds.
pub fn cross_validate<S: AsRef<str>>(
    w: &DivergenceMatrix,
    labels: &[S],
    folds: usize,
    k_vote: usize,
    seed: u64,
) -> Result<CvOutcome> {
    let n = w.len();
    if labels.len() != n {
        return Err(Error::Contract(format!("{} labels for {n} groups", labels.len())));
    }
    if folds < 2 || folds > n {
        return Err(Error::Contract(format!("folds must be in 2..={n}, got {folds}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    let mut predicted = vec![String::new(); n];
    for f in 0..folds {
        let test: Vec<usize> = (0..n).filter(|&i| fold[i] == f).collect();
        let train: Vec<usize> = (0..n).filter(|&i| fold[i] != f).collect();
        let train_labels: Vec<&str> = train.iter().map(|&i| labels[i].as_ref()).collect();
        let preds = knn_classify(&w.block(&test, &train), &train_labels, k_vote)?;
        for (&i, p) in test.iter().zip(preds) {
            predicted[i] = p;
        }
    }
    let truth: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
    let correct = truth.iter().zip(&predicted).filter(|(a, b)| a == b).count();
    Ok(CvOutcome {
        ids: w.ids().to_vec(),
        truth,
        predicted,
        fold,
        accuracy: correct as f64 / n as f64,
    })
}
