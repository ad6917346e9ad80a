//! Parametric comparator: one Gaussian per group, closed-form divergences.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::dataset::{Dataset, Points};
use crate::error::{Error, Result};
use crate::estimators::{
    symmetrize, CrossDivergences, DivergenceMatrix, EstimatorConfig, EstimatorKind, Provenance,
};

/// Relative size of the diagonal ridge added to near-singular covariances.
pub const RIDGE_SCALE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianFit {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if covariance.nrows() != mean.len() || covariance.ncols() != mean.len() {
            return Err(Error::Contract("covariance shape does not match mean".into()));
        }
        Ok(GaussianFit { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Sample mean and unbiased (T-1) covariance. If the smallest eigenvalue is
/// below `1e-9 * trace / d`, that amount is added to the diagonal.
pub fn fit_gaussian(points: &Points) -> Result<GaussianFit> {
    let t = points.len();
    if t < 2 {
        return Err(Error::InsufficientSample(format!(
            "a Gaussian fit needs at least 2 points, got {t}"
        )));
    }
    let d = points.dim();
    let mut mean = DVector::zeros(d);
    for row in points.rows() {
        for (a, v) in row.iter().enumerate() {
            mean[a] += v;
        }
    }
    mean /= t as f64;
    let mut cov = DMatrix::zeros(d, d);
    for row in points.rows() {
        for a in 0..d {
            let da = row[a] - mean[a];
            for b in a..d {
                cov[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / (t - 1) as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let trace = cov.trace();
    let floor = if trace > 0.0 {
        RIDGE_SCALE * trace / d as f64
    } else {
        RIDGE_SCALE
    };
    let min_eig = cov
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < floor {
        for a in 0..d {
            cov[(a, a)] += floor;
        }
    }
    GaussianFit::new(mean, cov)
}

fn cholesky(m: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m).ok_or_else(|| Error::Domain(format!("{what} is not positive definite")))
}

fn ln_det(ch: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

fn check_dims(p: &GaussianFit, q: &GaussianFit) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            group: "second Gaussian".into(),
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(())
}

/// Closed-form Rényi-α divergence between two Gaussians:
/// `(α/2) Δμᵀ Σ_α⁻¹ Δμ - ln(det Σ_α / (det Σ_p^{1-α} det Σ_q^α)) / (2(α-1))`
/// with `Σ_α = (1-α) Σ_p + α Σ_q`.
pub fn gaussian_renyi(p: &GaussianFit, q: &GaussianFit, alpha: f64) -> Result<f64> {
    check_dims(p, q)?;
    if !alpha.is_finite() || alpha == 1.0 {
        return Err(Error::Config(format!("alpha must differ from 1, got {alpha}")));
    }
    if p == q {
        return Ok(0.0);
    }
    let sigma_alpha = &p.covariance * (1.0 - alpha) + &q.covariance * alpha;
    let ch_alpha = cholesky(sigma_alpha, "the mixed covariance")?;
    let ch_p = cholesky(p.covariance.clone(), "the first covariance")?;
    let ch_q = cholesky(q.covariance.clone(), "the second covariance")?;
    let delta = &q.mean - &p.mean;
    let mahal = delta.dot(&ch_alpha.solve(&delta));
    let log_ratio = ln_det(&ch_alpha) - (1.0 - alpha) * ln_det(&ch_p) - alpha * ln_det(&ch_q);
    Ok(0.5 * alpha * mahal - log_ratio / (2.0 * (alpha - 1.0)))
}

/// `∫ N(x; μ_a, Σ_a) N(x; μ_b, Σ_b) dx = N(μ_a; μ_b, Σ_a + Σ_b)`.
fn gaussian_overlap(mu_a: &DVector<f64>, mu_b: &DVector<f64>, sum: DMatrix<f64>) -> Result<f64> {
    let d = mu_a.len() as f64;
    let ch = cholesky(sum, "a covariance sum")?;
    let delta = mu_a - mu_b;
    let mahal = delta.dot(&ch.solve(&delta));
    Ok((-0.5 * (d * (2.0 * std::f64::consts::PI).ln() + ln_det(&ch) + mahal)).exp())
}

/// Closed-form L2 distance `√∫(p - q)²` between two Gaussians.
pub fn gaussian_l2(p: &GaussianFit, q: &GaussianFit) -> Result<f64> {
    check_dims(p, q)?;
    if p == q {
        return Ok(0.0);
    }
    let pp = gaussian_overlap(&p.mean, &p.mean, &p.covariance * 2.0)?;
    let qq = gaussian_overlap(&q.mean, &q.mean, &q.covariance * 2.0)?;
    let pq = gaussian_overlap(&p.mean, &q.mean, &p.covariance + &q.covariance)?;
    Ok((pp + qq - 2.0 * pq).max(0.0).sqrt())
}

fn directed(p: &GaussianFit, q: &GaussianFit, cfg: &EstimatorConfig) -> Result<f64> {
    match cfg.kind {
        EstimatorKind::RenyiAlpha => gaussian_renyi(p, q, cfg.alpha),
        EstimatorKind::L2 => gaussian_l2(p, q),
    }
}

fn fit_all(ds: &Dataset) -> Result<Vec<GaussianFit>> {
    ds.groups()
        .par_iter()
        .map(|g| {
            fit_gaussian(g.points()).map_err(|e| match e {
                Error::InsufficientSample(msg) => {
                    Error::InsufficientSample(format!("group `{}`: {msg}", g.id()))
                }
                other => other,
            })
        })
        .collect()
}

/// Pairwise Gaussian-baseline divergences, in the same layout as the
/// nonparametric matrix. Only `kind`, `alpha` and `symmetrize` of `cfg` are read.
pub fn gaussian_divergence_matrix(ds: &Dataset, cfg: &EstimatorConfig) -> Result<DivergenceMatrix> {
    let fits = fit_all(ds)?;
    let n = ds.len();
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let ij = directed(&fits[i], &fits[j], cfg)?;
            let ji = directed(&fits[j], &fits[i], cfg)?;
            if cfg.symmetrize {
                let s = symmetrize(ij, ji);
                values[(i, j)] = s;
                values[(j, i)] = s;
            } else {
                values[(i, j)] = ij;
                values[(j, i)] = ji;
            }
        }
    }
    DivergenceMatrix::new(ds.ids(), values, Provenance::GaussianBaseline(*cfg))
}

pub fn gaussian_cross_divergences(
    rows: &Dataset,
    cols: &Dataset,
    cfg: &EstimatorConfig,
) -> Result<CrossDivergences> {
    let fr = fit_all(rows)?;
    let fc = fit_all(cols)?;
    let mut values = DMatrix::zeros(rows.len(), cols.len());
    for (i, p) in fr.iter().enumerate() {
        for (j, q) in fc.iter().enumerate() {
            let ij = directed(p, q, cfg)?;
            values[(i, j)] = if cfg.symmetrize {
                symmetrize(ij, directed(q, p, cfg)?)
            } else {
                ij
            };
        }
    }
    Ok(CrossDivergences {
        row_ids: rows.ids(),
        col_ids: cols.ids(),
        values,
    })
}
