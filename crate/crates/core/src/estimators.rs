//! k-NN estimators of `D_α = ∫ p^α q^{1-α}` and `L² = ∫ (p - q)²`, the Rényi
//! and L2 divergences derived from them, and pairwise divergence matrices.
//!
//! Both estimators only look at two distances per sample point `x` of the
//! first sample: `ρ_k(x)`, the distance to its k-th nearest neighbor among
//! the other points of its own sample, and `ν_k(x)`, the distance to its k-th
//! nearest neighbor in the second sample. Each density power that appears in
//! the integrands is replaced by the matching power of a k-NN density
//! estimate, and a gamma-function factor removes the bias that a fixed `k`
//! would otherwise leave (the scaled volumes `N c ρ_k^d` are asymptotically
//! Erlang distributed, and the factor is the ratio of Erlang moments).

use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::dataset::{Dataset, Points};
use crate::error::{Error, Result};
use crate::knn::{ln_unit_ball_volume, NeighborIndex};

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_K: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    RenyiAlpha,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    /// Only read when `kind` is [`EstimatorKind::RenyiAlpha`].
    pub alpha: f64,
    pub k: usize,
    pub symmetrize: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig::renyi(DEFAULT_ALPHA, DEFAULT_K)
    }
}

impl EstimatorConfig {
    pub fn renyi(alpha: f64, k: usize) -> Self {
        EstimatorConfig {
            kind: EstimatorKind::RenyiAlpha,
            alpha,
            k,
            symmetrize: true,
        }
    }

    pub fn l2(k: usize) -> Self {
        EstimatorConfig {
            kind: EstimatorKind::L2,
            alpha: DEFAULT_ALPHA,
            k,
            symmetrize: true,
        }
    }

    pub fn with_symmetrize(mut self, symmetrize: bool) -> Self {
        self.symmetrize = symmetrize;
        self
    }

    /// Matrix-level validity. Rényi needs `k > 2|α - 1|` (the consistency
    /// condition, stricter than the finiteness condition on the correction
    /// factor); L2 needs `k ≥ 3`.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            EstimatorKind::RenyiAlpha => {
                check_alpha(self.alpha)?;
                if (self.k as f64) <= 2.0 * (self.alpha - 1.0).abs() {
                    return Err(Error::Config(format!(
                        "Rényi estimation with alpha = {} needs k > {}, got k = {}",
                        self.alpha,
                        2.0 * (self.alpha - 1.0).abs(),
                        self.k
                    )));
                }
            }
            EstimatorKind::L2 => check_l2_k(self.k)?,
        }
        Ok(())
    }

    /// Smallest group size the estimator can run on.
    pub fn min_group_size(&self) -> usize {
        self.k + 1
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha == 1.0 {
        return Err(Error::Config(format!(
            "alpha must be finite and different from 1, got {alpha}"
        )));
    }
    Ok(())
}

fn check_l2_k(k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::Config(format!(
            "the L2 estimator needs k - 2 > 0, got k = {k}"
        )));
    }
    Ok(())
}

/// `B_{k,α} = Γ(k)² / (Γ(k-α+1) Γ(k+α-1))`, evaluated through log-gamma.
pub fn correction_factor(k: usize, alpha: f64) -> Result<f64> {
    let ln_b = ln_correction_factor(k, alpha)?;
    if alpha.fract() == 0.0 {
        // integer alpha: the gamma ratio telescopes to a finite product
        let j = (alpha - 1.0).abs() as usize;
        let kf = k as f64;
        return Ok((1..=j).fold(1.0, |b, i| b * (kf - i as f64) / (kf + i as f64 - 1.0)));
    }
    Ok(ln_b.exp())
}

fn ln_correction_factor(k: usize, alpha: f64) -> Result<f64> {
    let kf = k as f64;
    if !alpha.is_finite() || kf <= (alpha - 1.0).abs() {
        return Err(Error::Domain(format!(
            "correction factor needs k > |alpha - 1|, got k = {k}, alpha = {alpha}"
        )));
    }
    Ok(2.0 * ln_gamma(kf) - ln_gamma(kf - alpha + 1.0) - ln_gamma(kf + alpha - 1.0))
}

/// Within-sample statistics of one sample, reusable against any other sample.
#[derive(Debug, Clone)]
pub struct PreparedSample {
    index: NeighborIndex,
    k: usize,
    /// Squared ρ_k for every point, in row order.
    rho_sq: Vec<f64>,
}

impl PreparedSample {
    pub fn new(points: &Points, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        let index = NeighborIndex::build(points)?;
        let rho_sq = index.kth_within_squared(k)?;
        if let Some(n) = rho_sq.iter().position(|&r| r == 0.0) {
            return Err(Error::DegenerateDistance(format!(
                "point {n} has {k} or more exact duplicates in its own sample"
            )));
        }
        Ok(PreparedSample { index, k, rho_sq })
    }

    pub fn len(&self) -> usize {
        self.rho_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho_sq.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn index(&self) -> &NeighborIndex {
        &self.index
    }

    /// Squared ν_k of this sample's points measured in `other`.
    fn cross_to(&self, own_points: &Points, other: &PreparedSample) -> Result<Vec<f64>> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                group: "second sample".into(),
                expected: self.dim(),
                found: other.dim(),
            });
        }
        other.index.kth_cross_squared(own_points, self.k)
    }
}

/// Log of `(N-1) ρ_k^d / (M ν_k^d)` for every point.
fn ln_volume_ratios(rho_sq: &[f64], nu_sq: &[f64], m: usize, d: usize) -> Vec<f64> {
    let n = rho_sq.len();
    let ln_counts = ((n - 1) as f64 / m as f64).ln();
    let half_d = d as f64 / 2.0;
    rho_sq
        .iter()
        .zip(nu_sq)
        .map(|(r, v)| half_d * (r.ln() - v.ln()) + ln_counts)
        .collect()
}

/// `(1/N) Σ [(N-1) ρ^d / (M ν^d)]^{1-α}`, i.e. the Rényi estimate before the
/// correction factor is applied.
fn uncorrected_d_alpha(rho_sq: &[f64], nu_sq: &[f64], m: usize, d: usize, alpha: f64) -> f64 {
    let n = rho_sq.len();
    let sum: f64 = ln_volume_ratios(rho_sq, nu_sq, m, d)
        .into_iter()
        .map(|l| ((1.0 - alpha) * l).exp())
        .sum();
    sum / n as f64
}

fn l2_squared_from_distances(rho_sq: &[f64], nu_sq: &[f64], m: usize, d: usize, k: usize) -> f64 {
    let n = rho_sq.len();
    let kf = k as f64;
    let ln_c = ln_unit_ball_volume(d);
    let half_d = d as f64 / 2.0;
    let ln_n1 = ((n - 1) as f64).ln();
    let ln_m = (m as f64).ln();
    let pp = kf - 1.0;
    let pq = 2.0 * (kf - 1.0);
    let qq = (kf - 2.0) * (kf - 1.0) / kf;
    let sum: f64 = rho_sq
        .iter()
        .zip(nu_sq)
        .map(|(r, v)| {
            // a = (N-1) c ρ^d, b = M c ν^d
            let ln_a = ln_n1 + ln_c + half_d * r.ln();
            let ln_b = ln_m + ln_c + half_d * v.ln();
            pp * (-ln_a).exp() - pq * (-ln_b).exp() + qq * (ln_a - 2.0 * ln_b).exp()
        })
        .sum();
    sum / n as f64
}

fn check_pair(x: &Points, y: &Points, k: usize) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            group: "second sample".into(),
            expected: x.dim(),
            found: y.dim(),
        });
    }
    if k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    if k + 1 > x.len() {
        return Err(Error::InsufficientSample(format!(
            "first sample has {} points, k = {k} needs at least {}",
            x.len(),
            k + 1
        )));
    }
    if k > y.len() {
        return Err(Error::InsufficientSample(format!(
            "second sample has {} points, k = {k} needs at least {k}",
            y.len()
        )));
    }
    Ok(())
}

fn directed_distances(x: &Points, y: &Points, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_pair(x, y, k)?;
    let px = PreparedSample::new(x, k)?;
    let y_index = NeighborIndex::build(y)?;
    let nu_sq = y_index.kth_cross_squared(x, k)?;
    Ok((px.rho_sq, nu_sq))
}

/// k-NN estimate of `D_α(p‖q) = ∫ p^α q^{1-α}` from `x ~ p` and `y ~ q`.
pub fn estimate_d_alpha(x: &Points, y: &Points, k: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let ln_b = ln_correction_factor(k, alpha).map_err(|e| Error::Config(e.to_string()))?;
    let (rho_sq, nu_sq) = directed_distances(x, y, k)?;
    Ok(uncorrected_d_alpha(&rho_sq, &nu_sq, y.len(), x.dim(), alpha) * ln_b.exp())
}

/// Rényi-α divergence estimate `log(D̂_α) / (α - 1)`. Not clamped: independent
/// samples of one distribution can give small negative values.
pub fn renyi_divergence(x: &Points, y: &Points, k: usize, alpha: f64) -> Result<f64> {
    Ok(estimate_d_alpha(x, y, k, alpha)?.ln() / (alpha - 1.0))
}

/// k-NN estimate of `∫ (p - q)²`. Each of the three terms of
/// `∫ (p - 2q + q²/p) p` gets its own Erlang-moment correction. The result is
/// not clamped and can be negative.
pub fn estimate_l2_squared(x: &Points, y: &Points, k: usize) -> Result<f64> {
    check_l2_k(k)?;
    let (rho_sq, nu_sq) = directed_distances(x, y, k)?;
    Ok(l2_squared_from_distances(&rho_sq, &nu_sq, y.len(), x.dim(), k))
}

/// `√max(0, L̂²)`.
pub fn l2_divergence(x: &Points, y: &Points, k: usize) -> Result<f64> {
    Ok(estimate_l2_squared(x, y, k)?.max(0.0).sqrt())
}

/// Two-way average of directed divergences.
pub fn symmetrize(a: f64, b: f64) -> f64 {
    (a + b) / 2.0
}

/// Where the numbers in a [`DivergenceMatrix`] came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    NonParametric(EstimatorConfig),
    /// Closed-form divergences between single Gaussian fits.
    GaussianBaseline(EstimatorConfig),
    /// Read back from a CSV file.
    File,
}

/// Square matrix of pairwise divergences indexed by group id.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceMatrix {
    ids: Vec<String>,
    values: DMatrix<f64>,
    provenance: Provenance,
}

impl DivergenceMatrix {
    pub fn new(ids: Vec<String>, values: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        if values.nrows() != ids.len() || values.ncols() != ids.len() {
            return Err(Error::Contract(format!(
                "{} ids for a {}x{} matrix",
                ids.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("divergence matrix has non-finite entries".into()));
        }
        Ok(DivergenceMatrix {
            ids,
            values,
            provenance,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.values == self.values.transpose()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Rows `rows`, columns `cols` as a rectangular block.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> CrossDivergences {
        CrossDivergences {
            row_ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
            col_ids: cols.iter().map(|&j| self.ids[j].clone()).collect(),
            values: DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
                self.values[(rows[r], cols[c])]
            }),
        }
    }
}

/// Rectangular divergences from each row group to each column group, e.g.
/// test groups against training groups.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossDivergences {
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub values: DMatrix<f64>,
}

fn prepare_groups(ds: &Dataset, cfg: &EstimatorConfig) -> Result<Vec<PreparedSample>> {
    let min = cfg.min_group_size();
    if let Some(g) = ds.groups().iter().find(|g| g.len() < min) {
        return Err(Error::InsufficientSample(format!(
            "group `{}` has {} points; k = {} needs at least {min}",
            g.id(),
            g.len(),
            cfg.k
        )));
    }
    ds.groups()
        .par_iter()
        .map(|g| {
            PreparedSample::new(g.points(), cfg.k).map_err(|e| match e {
                Error::DegenerateDistance(msg) => {
                    Error::DegenerateDistance(format!("group `{}`: {msg}", g.id()))
                }
                other => other,
            })
        })
        .collect()
}

/// Directed divergence of `a` (with points `a_points`) from `b`.
fn directed(
    cfg: &EstimatorConfig,
    a: &PreparedSample,
    a_points: &Points,
    a_id: &str,
    b: &PreparedSample,
    b_id: &str,
) -> Result<f64> {
    let nu_sq = a.cross_to(a_points, b).map_err(|e| match e {
        Error::DegenerateDistance(msg) => {
            Error::DegenerateDistance(format!("groups `{a_id}` -> `{b_id}`: {msg}"))
        }
        Error::InsufficientSample(msg) => {
            Error::InsufficientSample(format!("groups `{a_id}` -> `{b_id}`: {msg}"))
        }
        other => other,
    })?;
    let d = a.dim();
    let m = b.len();
    Ok(match cfg.kind {
        EstimatorKind::RenyiAlpha => {
            let ln_b = ln_correction_factor(cfg.k, cfg.alpha)?;
            let d_alpha = uncorrected_d_alpha(&a.rho_sq, &nu_sq, m, d, cfg.alpha);
            (d_alpha.ln() + ln_b) / (cfg.alpha - 1.0)
        }
        EstimatorKind::L2 => l2_squared_from_distances(&a.rho_sq, &nu_sq, m, d, cfg.k)
            .max(0.0)
            .sqrt(),
    })
}

/// All pairwise divergences `w_{i,j}` between the groups of `ds`. The diagonal
/// is zero; with `cfg.symmetrize` both cells hold the two-way average.
/// Each group's within-sample distances are computed once. Every cell is
/// computed independently, so the result does not depend on thread count.
pub fn divergence_matrix(ds: &Dataset, cfg: &EstimatorConfig) -> Result<DivergenceMatrix> {
    cfg.validate()?;
    let prepared = prepare_groups(ds, cfg)?;
    let n = ds.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let results: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (gi, gj) = (ds.group(i), ds.group(j));
            let ij = directed(cfg, &prepared[i], gi.points(), gi.id(), &prepared[j], gj.id())?;
            let ji = directed(cfg, &prepared[j], gj.points(), gj.id(), &prepared[i], gi.id())?;
            Ok((ij, ji))
        })
        .collect::<Result<_>>()?;
    let mut values = DMatrix::zeros(n, n);
    for (&(i, j), &(ij, ji)) in pairs.iter().zip(&results) {
        if cfg.symmetrize {
            let s = symmetrize(ij, ji);
            values[(i, j)] = s;
            values[(j, i)] = s;
        } else {
            values[(i, j)] = ij;
            values[(j, i)] = ji;
        }
    }
    DivergenceMatrix::new(ds.ids(), values, Provenance::NonParametric(*cfg))
}

/// Divergences from every group of `rows` to every group of `cols`.
pub fn cross_divergences(
    rows: &Dataset,
    cols: &Dataset,
    cfg: &EstimatorConfig,
) -> Result<CrossDivergences> {
    cfg.validate()?;
    if rows.dim() != cols.dim() {
        return Err(Error::DimensionMismatch {
            group: "column dataset".into(),
            expected: rows.dim(),
            found: cols.dim(),
        });
    }
    let pr = prepare_groups(rows, cfg)?;
    let pc = prepare_groups(cols, cfg)?;
    let (nr, nc) = (rows.len(), cols.len());
    let cells: Vec<f64> = (0..nr * nc)
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / nc, cell % nc);
            let (gi, gj) = (rows.group(i), cols.group(j));
            let ij = directed(cfg, &pr[i], gi.points(), gi.id(), &pc[j], gj.id())?;
            if cfg.symmetrize {
                let ji = directed(cfg, &pc[j], gj.points(), gj.id(), &pr[i], gi.id())?;
                Ok(symmetrize(ij, ji))
            } else {
                Ok(ij)
            }
        })
        .collect::<Result<_>>()?;
    Ok(CrossDivergences {
        row_ids: rows.ids(),
        col_ids: cols.ids(),
        values: DMatrix::from_row_slice(nr, nc, &cells),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Group;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn normal_sample(n: usize, mean: f64, seed: u64) -> Points {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(mean, 1.0).unwrap();
        Points::from_scalars(&(0..n).map(|_| dist.sample(&mut rng)).collect::<Vec<_>>())
    }

    /// Log-free gamma ratio via the reflection formula and the recurrence
    /// Γ(x+1) = xΓ(x); independent of any log-gamma routine.
    fn b_oracle(k: usize, alpha: f64) -> f64 {
        let pi = std::f64::consts::PI;
        // 1 / (Γ(2-α) Γ(α)) = sin(πα) / ((1-α) π)
        let sinc = if alpha == 0.0 { 1.0 } else { (pi * alpha).sin() / (pi * alpha) };
        if k == 1 {
            return sinc * alpha / (1.0 - alpha);
        }
        let mut b = sinc / ((1.0 - alpha) * (2.0 - alpha));
        for i in 1..=(k - 2) {
            let i = i as f64;
            b *= (1.0 + i) * (1.0 + i) / ((2.0 - alpha + i) * (alpha + i));
        }
        b
    }

    #[test]
    fn correction_factor_known_values() {
        assert!((correction_factor(5, 0.0).unwrap() - 0.8).abs() < 1e-14);
        assert!((correction_factor(5, 0.5).unwrap() - b_oracle(5, 0.5)).abs() < 1e-13);
        assert!((correction_factor(5, 0.5).unwrap() - 0.9461).abs() < 1e-4);
        assert!((correction_factor(1, 0.5).unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn correction_factor_swap_symmetry() {
        for k in 1..30 {
            for alpha in [0.1, 0.3, 0.5, 0.75, 0.9] {
                let a = correction_factor(k, alpha).unwrap();
                let b = correction_factor(k, 2.0 - alpha).unwrap();
                assert!((a - b).abs() <= 1e-13 * a);
            }
        }
    }

    #[test]
    fn correction_factor_domain() {
        assert!(matches!(correction_factor(1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(correction_factor(1, 2.5), Err(Error::Domain(_))));
    }

    #[test]
    fn hand_case() {
        let x = Points::from_scalars(&[0.0, 2.0]);
        let y = Points::from_scalars(&[1.0]);
        let expected = 2f64.sqrt() * 2.0 / std::f64::consts::PI;
        let d = estimate_d_alpha(&x, &y, 1, 0.5).unwrap();
        assert!((d - expected).abs() < 1e-14);
        assert!((d - 0.9003).abs() < 1e-4);
        let r = renyi_divergence(&x, &y, 1, 0.5).unwrap();
        assert!((r - expected.ln() / -0.5).abs() < 1e-14);
        assert!((r - 0.2100).abs() < 1e-4);
    }

    #[test]
    fn correction_enters_linearly() {
        let x = normal_sample(400, 0.0, 1);
        let y = normal_sample(300, 0.7, 2);
        let (rho, nu) = directed_distances(&x, &y, 10).unwrap();
        let raw = uncorrected_d_alpha(&rho, &nu, y.len(), 1, 0.3);
        let est = estimate_d_alpha(&x, &y, 10, 0.3).unwrap();
        let b = correction_factor(10, 0.3).unwrap();
        assert!((est - raw * b).abs() <= 1e-14 * est);
    }

    #[test]
    fn l2_rejects_small_k() {
        let x = normal_sample(50, 0.0, 1);
        assert!(matches!(estimate_l2_squared(&x, &x, 2), Err(Error::Config(_))));
    }

    #[test]
    fn precondition_errors() {
        let x = normal_sample(10, 0.0, 1);
        let y = normal_sample(5, 0.0, 2);
        assert!(matches!(
            estimate_d_alpha(&x, &y, 6, 0.5),
            Err(Error::InsufficientSample(_))
        ));
        assert!(matches!(estimate_d_alpha(&x, &y, 3, 1.0), Err(Error::Config(_))));
        assert!(matches!(estimate_d_alpha(&x, &y, 1, -0.5), Err(Error::Config(_))));
        let dup = Points::from_scalars(&[0.0, 0.0, 1.0, 2.0]);
        assert!(matches!(
            estimate_d_alpha(&dup, &y, 1, 0.5),
            Err(Error::DegenerateDistance(_))
        ));
    }

    #[test]
    fn clamping_and_symmetrize() {
        assert_eq!(symmetrize(0.2, 0.4), 0.30000000000000004);
        assert!((symmetrize(0.25, 0.27) - 0.26).abs() < 1e-15);
        assert_eq!(symmetrize(0.7, 0.7), 0.7);
        assert_eq!((-0.003f64).max(0.0).sqrt(), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::default().validate().is_ok());
        assert!(EstimatorConfig::renyi(0.5, 1).validate().is_err());
        assert!(EstimatorConfig::renyi(-1.0, 4).validate().is_err());
        assert!(EstimatorConfig::renyi(-1.0, 5).validate().is_ok());
        assert!(EstimatorConfig::l2(2).validate().is_err());
        assert!(EstimatorConfig::l2(3).validate().is_ok());
    }

    fn small_dataset() -> Dataset {
        let groups = (0..4)
            .map(|i| {
                Group::new(format!("g{i}"), normal_sample(60, i as f64 * 0.5, 10 + i), None)
                    .unwrap()
            })
            .collect();
        Dataset::new(groups).unwrap()
    }

    #[test]
    fn matrix_shape_and_symmetry() {
        let ds = small_dataset();
        let m = divergence_matrix(&ds, &EstimatorConfig::renyi(0.5, 5)).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.is_symmetric());
        for i in 0..4 {
            assert_eq!(m.get(i, i), 0.0);
        }
        let asym = divergence_matrix(&ds, &EstimatorConfig::l2(5).with_symmetrize(false)).unwrap();
        assert!(!asym.is_symmetric());
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let direct = l2_divergence(ds.group(i).points(), ds.group(j).points(), 5)
                        .unwrap();
                    assert_eq!(asym.get(i, j), direct);
                }
            }
        }
    }

    #[test]
    fn single_group_matrix() {
        let ds = Dataset::new(vec![Group::new("a", normal_sample(30, 0.0, 1), None).unwrap()])
            .unwrap();
        let m = divergence_matrix(&ds, &EstimatorConfig::default()).unwrap();
        assert_eq!(m.values().as_slice(), &[0.0]);
    }

    #[test]
    fn small_group_is_named() {
        let ds = Dataset::new(vec![
            Group::new("big", normal_sample(30, 0.0, 1), None).unwrap(),
            Group::new("tiny", normal_sample(5, 0.0, 2), None).unwrap(),
        ])
        .unwrap();
        match divergence_matrix(&ds, &EstimatorConfig::default()) {
            Err(Error::InsufficientSample(msg)) => {
                assert!(msg.contains("tiny") && msg.contains("21"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cross_block_matches_full_matrix() {
        let ds = small_dataset();
        let cfg = EstimatorConfig::renyi(0.5, 5);
        let full = divergence_matrix(&ds, &cfg).unwrap();
        let rows = ds.subset(&[0, 1]).unwrap();
        let cols = ds.subset(&[2, 3]).unwrap();
        let cross = cross_divergences(&rows, &cols, &cfg).unwrap();
        assert_eq!(cross.values, full.block(&[0, 1], &[2, 3]).values);
    }

    #[test]
    fn parallel_result_equals_serial() {
        let ds = small_dataset();
        let cfg = EstimatorConfig::renyi(0.5, 5);
        let par = divergence_matrix(&ds, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| divergence_matrix(&ds, &cfg)).unwrap();
        assert_eq!(par, serial);
    }
}
