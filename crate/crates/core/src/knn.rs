//! Exact Euclidean k-th nearest-neighbor distances.
//!
//! [`NeighborIndex`] is a balanced kd-tree (median split on the coordinate of
//! widest spread, leaves of at most [`LEAF_SIZE`] points). Above
//! [`BRUTE_FORCE_DIM`] dimensions it degrades to a linear scan. Both paths
//! compute squared distances with the same summation order, so tree answers
//! are bit-identical to brute force.
//!
//! Ties between equally distant candidates are broken by point index. That
//! only decides *which* neighbor is reported, never the k-th distance.

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::dataset::Points;
use crate::error::{Error, Result};

pub const LEAF_SIZE: usize = 16;

/// Above this dimension queries scan all points instead of walking the tree.
pub const BRUTE_FORCE_DIM: usize = 15;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable search structure over one sample.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    /// Points reordered so every leaf is a contiguous block.
    coords: Vec<f64>,
    /// `original[slot]` is the caller's row index of the point stored at `slot`.
    original: Vec<usize>,
    dim: usize,
    nodes: Vec<Node>,
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Bounded sorted list of the best `k` candidates, keyed by (distance², index).
struct Candidates {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl Candidates {
    fn new(k: usize) -> Self {
        Candidates {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn worst(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].0
        }
    }

    #[inline]
    fn offer(&mut self, d2: f64, index: usize) {
        if self.items.len() == self.k {
            let (wd, wi) = self.items[self.k - 1];
            if d2 > wd || (d2 == wd && index > wi) {
                return;
            }
        }
        let pos = self
            .items
            .partition_point(|&(d, i)| d < d2 || (d == d2 && i < index));
        self.items.insert(pos, (d2, index));
        self.items.truncate(self.k);
    }
}

/// What a query should skip when collecting neighbors.
#[derive(Clone, Copy)]
enum Exclusion {
    /// Skip the indexed point with this original row index.
    Index(usize),
    /// Skip the first indexed point whose coordinates equal the query exactly.
    FirstCoincident,
}

impl NeighborIndex {
    pub fn build(points: &Points) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientSample(
                "cannot index an empty sample".into(),
            ));
        }
        if points.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("indexed points must be finite".into()));
        }
        let dim = points.dim();
        let n = points.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::new();
        if dim > BRUTE_FORCE_DIM {
            nodes.push(Node::Leaf { start: 0, end: n });
        } else {
            build_node(points, &mut order, 0, n, &mut nodes);
        }
        let mut coords = Vec::with_capacity(n * dim);
        for &i in &order {
            coords.extend_from_slice(points.row(i));
        }
        Ok(NeighborIndex {
            coords,
            original: order,
            dim,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The indexed point with original row index `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        let slot = self
            .original
            .iter()
            .position(|&o| o == i)
            .expect("row index out of range");
        &self.coords[slot * self.dim..(slot + 1) * self.dim]
    }

    fn slot(&self, s: usize) -> &[f64] {
        &self.coords[s * self.dim..(s + 1) * self.dim]
    }

    /// Squared distances to the `k` nearest candidates, ascending, with their
    /// original row indices.
    fn search(&self, query: &[f64], k: usize, exclusion: Option<Exclusion>) -> Vec<(f64, usize)> {
        let mut best = Candidates::new(k);
        let mut coincident_skipped = false;
        // (node, lower bound on the squared distance to anything inside it)
        let mut stack = vec![(0usize, 0.0f64)];
        while let Some((node, bound)) = stack.pop() {
            if bound > best.worst() {
                continue;
            }
            match self.nodes[node] {
                Node::Leaf { start, end } => {
                    for s in start..end {
                        let orig = self.original[s];
                        let p = self.slot(s);
                        match exclusion {
                            Some(Exclusion::Index(skip)) if skip == orig => continue,
                            Some(Exclusion::FirstCoincident)
                                if !coincident_skipped && p == query =>
                            {
                                coincident_skipped = true;
                                continue;
                            }
                            _ => {}
                        }
                        best.offer(squared_distance(query, p), orig);
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let diff = query[axis] - value;
                    let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                    stack.push((far, bound.max(diff * diff)));
                    stack.push((near, bound));
                }
            }
        }
        best.items
    }

    /// Squared k-th NN distance of every indexed point to the rest of its own
    /// sample (self excluded).
    pub(crate) fn kth_within_squared(&self, k: usize) -> Result<Vec<f64>> {
        let n = self.len();
        if k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if k >= n {
            return Err(Error::InsufficientSample(format!(
                "k = {k} needs at least {} points, sample has {n}",
                k + 1
            )));
        }
        let mut out = vec![0.0; n];
        out.par_iter_mut().enumerate().for_each(|(slot, o)| {
            let orig = self.original[slot];
            let found = self.search(self.slot(slot), k, Some(Exclusion::Index(orig)));
            *o = found[k - 1].0;
        });
        // `out` is in slot order; permute back to the caller's row order
        let mut by_row = vec![0.0; n];
        for (slot, &orig) in self.original.iter().enumerate() {
            by_row[orig] = out[slot];
        }
        Ok(by_row)
    }

    /// Euclidean distance from every indexed point to its k-th nearest other
    /// point of the same sample, in the caller's row order.
    pub fn kth_nn_within(&self, k: usize) -> Result<Vec<f64>> {
        Ok(self
            .kth_within_squared(k)?
            .into_iter()
            .map(f64::sqrt)
            .collect())
    }

    pub(crate) fn kth_cross_squared(&self, queries: &Points, k: usize) -> Result<Vec<f64>> {
        if queries.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                group: "query".into(),
                expected: self.dim,
                found: queries.dim(),
            });
        }
        if k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        let m = self.len();
        if k > m {
            return Err(Error::InsufficientSample(format!(
                "k = {k} exceeds the {m} indexed points"
            )));
        }
        let rows: Vec<&[f64]> = queries.rows().collect();
        rows.par_iter()
            .enumerate()
            .map(|(qi, q)| {
                let found = self.search(q, k, Some(Exclusion::FirstCoincident));
                match found.get(k - 1) {
                    None => Err(Error::InsufficientSample(format!(
                        "query point {qi} coincides with an indexed point, leaving fewer than k = {k} neighbors"
                    ))),
                    Some(&(0.0, _)) => Err(Error::DegenerateDistance(format!(
                        "query point {qi} has duplicate indexed points at its location"
                    ))),
                    Some(&(d2, _)) => Ok(d2),
                }
            })
            .collect()
    }

    /// Euclidean distance from each query point to its k-th nearest indexed
    /// point, skipping one indexed point that coincides exactly with the query.
    pub fn kth_nn_cross(&self, queries: &Points, k: usize) -> Result<Vec<f64>> {
        Ok(self
            .kth_cross_squared(queries, k)?
            .into_iter()
            .map(f64::sqrt)
            .collect())
    }

    /// The `k` nearest indexed points to `query` as (distance, row index),
    /// ascending. Nothing is excluded.
    pub fn nearest(&self, query: &[f64], k: usize) -> Vec<(f64, usize)> {
        self.search(query, k.min(self.len()), None)
            .into_iter()
            .map(|(d2, i)| (d2.sqrt(), i))
            .collect()
    }
}

fn build_node(
    points: &Points,
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    nodes.push(Node::Leaf { start, end });
    if end - start <= LEAF_SIZE {
        return id;
    }
    let dim = points.dim();
    let slice = &mut order[start..end];
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for &i in slice.iter() {
        for (a, &v) in points.row(i).iter().enumerate() {
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    let (axis, spread) = (0..dim)
        .map(|a| (a, hi[a] - lo[a]))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    if spread <= 0.0 {
        return id;
    }
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        points.row(a)[axis]
            .total_cmp(&points.row(b)[axis])
            .then(a.cmp(&b))
    });
    let value = points.row(slice[mid])[axis];
    let left = build_node(points, order, start, start + mid, nodes);
    let right = build_node(points, order, start + mid, end, nodes);
    nodes[id] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    id
}

pub fn build_index(points: &Points) -> Result<NeighborIndex> {
    NeighborIndex::build(points)
}

/// Volume of the d-dimensional Euclidean unit ball, π^{d/2} / Γ(d/2 + 1).
pub fn unit_ball_volume(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    let half = d as f64 / 2.0;
    (half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0)).exp()
}

/// Natural log of [`unit_ball_volume`], usable where the volume itself would
/// underflow.
pub fn ln_unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, d: usize, seed: u64) -> Points {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Points::new((0..n * d).map(|_| rng.random::<f64>()).collect(), d).unwrap()
    }

    fn brute_within(p: &Points, k: usize) -> Vec<f64> {
        (0..p.len())
            .map(|i| {
                let mut d: Vec<f64> = (0..p.len())
                    .filter(|&j| j != i)
                    .map(|j| squared_distance(p.row(i), p.row(j)))
                    .collect();
                d.sort_by(f64::total_cmp);
                d[k - 1].sqrt()
            })
            .collect()
    }

    fn brute_cross(q: &Points, y: &Points, k: usize) -> Vec<f64> {
        q.rows()
            .map(|x| {
                let mut d: Vec<f64> = y.rows().map(|r| squared_distance(x, r)).collect();
                d.sort_by(f64::total_cmp);
                d[k - 1].sqrt()
            })
            .collect()
    }

    #[test]
    fn line_examples() {
        let idx = build_index(&Points::from_scalars(&[0.0, 1.0, 3.0])).unwrap();
        assert_eq!(idx.kth_nn_within(1).unwrap(), vec![1.0, 1.0, 2.0]);
        assert_eq!(idx.kth_nn_within(2).unwrap(), vec![3.0, 2.0, 3.0]);
        assert!(matches!(
            idx.kth_nn_within(3),
            Err(Error::InsufficientSample(_))
        ));
    }

    #[test]
    fn cross_examples() {
        let y = build_index(&Points::from_scalars(&[1.0])).unwrap();
        let q = Points::from_scalars(&[0.0, 2.0]);
        assert_eq!(y.kth_nn_cross(&q, 1).unwrap(), vec![1.0, 1.0]);

        let y = build_index(&Points::from_scalars(&[1.0, 3.0])).unwrap();
        let q = Points::from_scalars(&[1.0]);
        assert_eq!(y.kth_nn_cross(&q, 1).unwrap(), vec![2.0]);
        assert!(matches!(
            y.kth_nn_cross(&q, 2),
            Err(Error::InsufficientSample(_))
        ));
    }

    #[test]
    fn duplicate_indexed_points_at_query_are_degenerate() {
        let y = build_index(&Points::from_scalars(&[1.0, 1.0, 3.0])).unwrap();
        let q = Points::from_scalars(&[1.0]);
        assert!(matches!(
            y.kth_nn_cross(&q, 1),
            Err(Error::DegenerateDistance(_))
        ));
        assert_eq!(y.kth_nn_cross(&q, 2).unwrap(), vec![2.0]);
    }

    #[test]
    fn single_point_index() {
        let idx = build_index(&Points::from_rows(&[[1.0, 2.0, 3.0]]).unwrap()).unwrap();
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.point(0), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn duplicates_give_zero_within_distances() {
        let idx = build_index(&Points::from_scalars(&[2.0, 2.0, 5.0])).unwrap();
        assert_eq!(idx.kth_nn_within(1).unwrap(), vec![0.0, 0.0, 3.0]);
    }

    #[test]
    fn within_matches_brute_force() {
        let p = random_points(500, 2, 1);
        let idx = build_index(&p).unwrap();
        assert_eq!(idx.kth_nn_within(20).unwrap(), brute_within(&p, 20));
    }

    #[test]
    fn cross_matches_brute_force() {
        let y = random_points(700, 2, 2);
        let q = random_points(500, 2, 3);
        let idx = build_index(&y).unwrap();
        assert_eq!(idx.kth_nn_cross(&q, 5).unwrap(), brute_cross(&q, &y, 5));
    }

    #[test]
    fn nearest_neighbor_on_large_cloud_matches_brute_force() {
        let p = random_points(10_000, 2, 4);
        let idx = build_index(&p).unwrap();
        let q = random_points(300, 2, 5);
        assert_eq!(idx.kth_nn_cross(&q, 1).unwrap(), brute_cross(&q, &p, 1));
        assert_eq!(
            idx.kth_nn_within(1).unwrap()[..200],
            brute_within(&p, 1)[..200]
        );
    }

    #[test]
    fn high_dimension_uses_scan_and_stays_exact() {
        let p = random_points(300, 20, 6);
        let idx = build_index(&p).unwrap();
        assert_eq!(idx.nodes.len(), 1);
        assert_eq!(idx.kth_nn_within(7).unwrap(), brute_within(&p, 7));
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-13);
        assert!((unit_ball_volume(3) - 4.18879020).abs() < 1e-8);
    }
}
