use std::collections::BTreeMap;

use super::ClusterAssignment;
use crate::error::{Error, Result};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with row/column potentials, O(n³)). Returns the column assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    assert!(cost.iter().all(|r| r.len() == n), "cost matrix must be square");
    const INF: i64 = i64::MAX / 4;
    // 1-based potentials; column 0 is a virtual start column
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if row_of[j] != 0 {
            assign[row_of[j] - 1] = j - 1;
        }
    }
    assign
}

/// Largest trace reachable by permuting the columns of a (possibly
/// rectangular) count matrix; missing rows/columns count as zeros.
pub fn max_trace(counts: &[Vec<i64>]) -> i64 {
    let rows = counts.len();
    let cols = counts.iter().map(Vec::len).max().unwrap_or(0);
    let n = rows.max(cols);
    if n == 0 {
        return 0;
    }
    let at = |r: usize, c: usize| counts.get(r).and_then(|row| row.get(c)).copied().unwrap_or(0);
    let cost: Vec<Vec<i64>> = (0..n).map(|r| (0..n).map(|c| -at(r, c)).collect()).collect();
    min_cost_assignment(&cost)
        .into_iter()
        .enumerate()
        .map(|(r, c)| at(r, c))
        .sum()
}

/// Fraction of groups correctly clustered after the best one-to-one matching
/// of clusters to labels.
pub fn cluster_trace_accuracy<S: AsRef<str>>(truth: &[S], pred: &ClusterAssignment) -> Result<f64> {
    if truth.len() != pred.cluster.len() {
        return Err(Error::Contract(format!(
            "{} truth labels for {} cluster assignments",
            truth.len(),
            pred.cluster.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Contract("no groups to score".into()));
    }
    let mut label_index = BTreeMap::new();
    for l in truth {
        let next = label_index.len();
        label_index.entry(l.as_ref()).or_insert(next);
    }
    let n_clusters = pred.cluster.iter().max().map_or(0, |m| m + 1).max(pred.n_clusters);
    let mut counts = vec![vec![0i64; n_clusters]; label_index.len()];
    for (l, &c) in truth.iter().zip(&pred.cluster) {
        counts[label_index[l.as_ref()]][c] += 1;
    }
    Ok(max_trace(&counts) as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assignment(cluster: Vec<usize>) -> ClusterAssignment {
        let n_clusters = cluster.iter().max().unwrap() + 1;
        ClusterAssignment {
            ids: (0..cluster.len()).map(|i| i.to_string()).collect(),
            cluster,
            n_clusters,
        }
    }

    #[test]
    fn relabeled_prediction_is_perfect() {
        let truth = ["a", "a", "b", "c", "c"];
        assert_eq!(cluster_trace_accuracy(&truth, &assignment(vec![2, 2, 0, 1, 1])).unwrap(), 1.0);
    }

    #[test]
    fn half_right() {
        let truth = ["a", "a", "b", "b"];
        assert_eq!(cluster_trace_accuracy(&truth, &assignment(vec![0, 1, 0, 1])).unwrap(), 0.5);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            cluster_trace_accuracy(&["a"], &assignment(vec![0, 1])),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn known_assignment() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let a = min_cost_assignment(&cost);
        let total: i64 = a.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
        assert_eq!(total, 5);
    }

    #[test]
    fn rectangular_counts_are_padded() {
        assert_eq!(max_trace(&[vec![5, 1, 0]]), 5);
        assert_eq!(max_trace(&[vec![1], vec![7], vec![2]]), 7);
    }
}
