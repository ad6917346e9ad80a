use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::require_symmetric;
use crate::error::{Error, Result};
use crate::estimators::DivergenceMatrix;

/// Neighbor rank used for each group's local affinity scale.
pub const LOCAL_SCALE_NEIGHBOR: usize = 7;
pub const KMEANS_RESTARTS: usize = 10;
const KMEANS_MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub ids: Vec<String>,
    pub cluster: Vec<usize>,
    pub n_clusters: usize,
}

/// Self-tuning spectral clustering on a symmetric divergence matrix.
///
/// Affinities are `exp(-w_ij² / (σ_i σ_j))` where `σ_i` is the divergence from
/// group `i` to its 7th nearest group (or its farthest, for fewer than 8
/// groups). Negative estimates are treated as zero divergence. The rows of the top-`c` eigenvectors of `D^{-1/2} A D^{-1/2}` are
/// normalised to unit length and grouped with k-means.
pub fn spectral_cluster(w: &DivergenceMatrix, c: usize, seed: u64) -> Result<ClusterAssignment> {
    require_symmetric(w)?;
    let n = w.len();
    if c < 2 || c > n {
        return Err(Error::Contract(format!(
            "cluster count must be in 2..={n}, got {c}"
        )));
    }
    let v = w.values().map(|d| d.max(0.0));
    let rank = LOCAL_SCALE_NEIGHBOR.min(n - 1);
    let sigma: Vec<f64> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| v[(i, j)]).collect();
            row.sort_by(f64::total_cmp);
            row[rank - 1]
        })
        .collect();
    let affinity = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return 0.0;
        }
        let d = v[(i, j)];
        if sigma[i] > 0.0 && sigma[j] > 0.0 {
            // (d/σ_i)(d/σ_j) rather than d²/(σ_i σ_j) to stay clear of overflow
            (-(d / sigma[i]) * (d / sigma[j])).exp()
        } else if d == 0.0 {
            1.0
        } else {
            0.0
        }
    });
    let lap = normalized_affinity(&affinity)?;
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r: Vec<f64> = order[..c].iter().map(|&e| eig.eigenvectors[(i, e)]).collect();
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                r.iter_mut().for_each(|x| *x /= norm);
            }
            r
        })
        .collect();
    let cluster = kmeans(&rows, c, KMEANS_RESTARTS, seed);
    Ok(ClusterAssignment {
        ids: w.ids().to_vec(),
        cluster,
        n_clusters: c,
    })
}

/// `D^{-1/2} A D^{-1/2}`; isolated nodes get a zero row.
fn normalized_affinity(affinity: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if affinity.iter().all(|a| *a == 0.0) {
        return Err(Error::FlatAffinity);
    }
    let n = affinity.nrows();
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| {
            let d = affinity.row(i).sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let lap = DMatrix::from_fn(n, n, |i, j| inv_sqrt_deg[i] * affinity[(i, j)] * inv_sqrt_deg[j]);
    Ok((&lap + lap.transpose()) * 0.5)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means with k-means++ seeding; the restart with the lowest
/// inertia wins (earliest on ties). All randomness comes from `seed`.
pub fn kmeans(data: &[Vec<f64>], c: usize, restarts: usize, seed: u64) -> Vec<usize> {
    assert!(c >= 1 && c <= data.len(), "need 1 <= c <= number of points");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts.max(1) {
        let (inertia, labels) = lloyd(data, c, &mut rng);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    best.expect("at least one restart").1
}

fn plus_plus_init(data: &[Vec<f64>], c: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut centers = vec![data[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = data.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < c {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.push(data[pick].clone());
        for (i, p) in data.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }
    centers
}

fn lloyd(data: &[Vec<f64>], c: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<usize>) {
    let dim = data[0].len();
    let mut centers = plus_plus_init(data, c, rng);
    let mut labels = vec![usize::MAX; data.len()];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for (i, p) in data.iter().enumerate() {
            let nearest = (0..c)
                .map(|k| (k, sq_dist(p, &centers[k])))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc })
                .0;
            if labels[i] != nearest {
                labels[i] = nearest;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; dim]; c];
        let mut counts = vec![0usize; c];
        for (p, &l) in data.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for k in 0..c {
            if counts[k] > 0 {
                centers[k] = sums[k].iter().map(|s| s / counts[k] as f64).collect();
            } else {
                // refill an empty cluster with the point worst served by its center
                let far = (0..data.len())
                    .map(|i| (i, sq_dist(&data[i], &centers[labels[i]])))
                    .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc })
                    .0;
                centers[k] = data[far].clone();
                labels[far] = k;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = data
        .iter()
        .zip(&labels)
        .map(|(p, &l)| sq_dist(p, &centers[l]))
        .sum();
    (inertia, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::Provenance;
    use crate::tasks::cluster_trace_accuracy;

    fn block_matrix(sizes: &[usize], within: f64, between: f64) -> (DivergenceMatrix, Vec<String>) {
        let labels: Vec<String> = sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(format!("b{b}"), s))
            .collect();
        let n = labels.len();
        // small deterministic jitter so the within-block values are not all equal
        let values = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else if labels[i] == labels[j] {
                within * (1.0 + 0.01 * ((i + j) % 5) as f64)
            } else {
                between
            }
        });
        let ids = (0..n).map(|i| format!("g{i:02}")).collect();
        (DivergenceMatrix::new(ids, values, Provenance::File).unwrap(), labels)
    }

    #[test]
    fn recovers_two_blocks() {
        let (w, labels) = block_matrix(&[6, 9], 0.1, 5.0);
        let a = spectral_cluster(&w, 2, 0).unwrap();
        assert_eq!(cluster_trace_accuracy(&labels, &a).unwrap(), 1.0);
    }

    #[test]
    fn negative_estimates_count_as_zero() {
        // unbiased estimators return small negative values for near-identical groups
        let (w, labels) = block_matrix(&[8, 8, 8], 0.02, 1.0);
        let n = w.len();
        let values = DMatrix::from_fn(n, n, |i, j| {
            let v = w.get(i, j);
            if v < 0.5 && (i + j) % 2 == 1 { -v } else { v }
        });
        let w = DivergenceMatrix::new(w.ids().to_vec(), values, Provenance::File).unwrap();
        let a = spectral_cluster(&w, 3, 0).unwrap();
        assert_eq!(cluster_trace_accuracy(&labels, &a).unwrap(), 1.0);
    }

    #[test]
    fn one_cluster_per_group_when_c_equals_i() {
        let (w, _) = block_matrix(&[2, 3], 0.5, 1.0);
        let a = spectral_cluster(&w, 5, 3).unwrap();
        let mut seen = a.cluster.clone();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn flat_affinity_is_an_error() {
        assert!(matches!(
            normalized_affinity(&DMatrix::zeros(3, 3)),
            Err(Error::FlatAffinity)
        ));
        // huge but finite divergences must not overflow into a flat matrix
        let values = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1e200 });
        let w = DivergenceMatrix::new(vec!["a".into(), "b".into(), "c".into()], values, Provenance::File)
            .unwrap();
        assert!(spectral_cluster(&w, 2, 0).is_ok());
    }

    #[test]
    fn invariant_under_group_reordering() {
        let (w, labels) = block_matrix(&[5, 5, 6], 0.2, 3.0);
        let a = spectral_cluster(&w, 3, 11).unwrap();
        let n = w.len();
        let perm: Vec<usize> = (0..n).rev().collect();
        let values = DMatrix::from_fn(n, n, |i, j| w.get(perm[i], perm[j]));
        let ids = perm.iter().map(|&p| w.ids()[p].clone()).collect();
        let wp = DivergenceMatrix::new(ids, values, Provenance::File).unwrap();
        let b = spectral_cluster(&wp, 3, 11).unwrap();
        // map b back to the original order and compare partitions
        let mut back = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            back[p] = b.cluster[i];
        }
        let as_labels: Vec<String> = a.cluster.iter().map(|c| c.to_string()).collect();
        let b_orig = ClusterAssignment { ids: w.ids().to_vec(), cluster: back, n_clusters: 3 };
        assert_eq!(cluster_trace_accuracy(&as_labels, &b_orig).unwrap(), 1.0);
        assert_eq!(cluster_trace_accuracy(&labels, &a).unwrap(), 1.0);
    }

    #[test]
    fn kmeans_separates_obvious_clusters() {
        let data = vec![vec![0.0], vec![0.1], vec![10.0], vec![10.1]];
        let l = kmeans(&data, 2, 3, 1);
        assert_eq!(l[0], l[1]);
        assert_eq!(l[2], l[3]);
        assert_ne!(l[0], l[2]);
    }
}
