//! Reference values computed independently of the estimators: quadrature of
//! known densities, Erlang moments, and exhaustive searches.

mod density;
mod quadrature;
mod suite;

pub use density::{KnownDensity, GAUSSIAN_TAIL};
pub use quadrature::{integrate, integrate_2d};
pub use suite::{
    baseline_disagreement, erlang_grid, hungarian_mismatches, run_suite, CheckOutcome, BASELINE_TOLERANCE,
    CORRECTION_ALPHAS, ERLANG_DRAWS, ERLANG_GAMMAS, ERLANG_KS, ERLANG_TOLERANCE,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

pub const QUAD_REL_TOL_1D: f64 = 1e-11;
pub const QUAD_REL_TOL_2D: f64 = 1e-9;
/// Largest probability mass allowed outside the integration region before an
/// integral is reported as divergent.
pub const MAX_MASS_LOSS: f64 = 1e-6;

type Region = Vec<(f64, f64)>;

fn integrate_over(region: &[(f64, f64)], f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    match region {
        [x] => {
            let mut buf = [0.0];
            integrate(
                |t| {
                    buf[0] = t;
                    f(&buf)
                },
                x.0,
                x.1,
                QUAD_REL_TOL_1D,
                1e-300,
            )
        }
        [x, y] => integrate_2d(|a, b| f(&[a, b]), *x, *y, QUAD_REL_TOL_2D, 1e-300),
        _ => Err(Error::Domain(format!(
            "quadrature is available in 1 or 2 dimensions, not {}",
            region.len()
        ))),
    }
}

fn check_pair(p: &KnownDensity, q: &KnownDensity) -> Result<()> {
    p.validate()?;
    q.validate()?;
    if p.dim() != q.dim() {
        return Err(Error::Config(format!(
            "densities have different dimensions: {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    Ok(())
}

fn intersection(p: &KnownDensity, q: &KnownDensity) -> Option<Region> {
    p.support()
        .into_iter()
        .zip(q.support())
        .map(|(a, b)| {
            let (lo, hi) = (a.0.max(b.0), a.1.min(b.1));
            (lo < hi).then_some((lo, hi))
        })
        .collect()
}

/// For two gaussians `p^α q^(1-α)` is proportional to the gaussian with
/// precision `T = αP_p + (1-α)P_q`; returns its ±tail box, or `None` when `T`
/// is not positive definite.
fn tilted_region(p: &KnownDensity, q: &KnownDensity, pp: &[f64], pq: &[f64], alpha: f64) -> Option<Region> {
    let t: Vec<f64> = pp.iter().zip(pq).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
    let (mp, mq) = (p.mean(), q.mean());
    match t.as_slice() {
        [t] => {
            if *t <= 0.0 {
                return None;
            }
            let m = (alpha * pp[0] * mp[0] + (1.0 - alpha) * pq[0] * mq[0]) / t;
            let s = GAUSSIAN_TAIL / t.sqrt();
            Some(vec![(m - s, m + s)])
        }
        [a, b, c, d] => {
            let det = a * d - b * c;
            if *a <= 0.0 || det <= 0.0 {
                return None;
            }
            let h: Vec<f64> = (0..2)
                .map(|r| {
                    alpha * (pp[2 * r] * mp[0] + pp[2 * r + 1] * mp[1])
                        + (1.0 - alpha) * (pq[2 * r] * mq[0] + pq[2 * r + 1] * mq[1])
                })
                .collect();
            let m = [(d * h[0] - b * h[1]) / det, (a * h[1] - c * h[0]) / det];
            let var = [d / det, a / det];
            Some((0..2).map(|i| (m[i] - GAUSSIAN_TAIL * var[i].sqrt(), m[i] + GAUSSIAN_TAIL * var[i].sqrt())).collect())
        }
        _ => unreachable!("gaussians are 1-D or 2-D"),
    }
}

/// Probability mass of `p` inside `region`, the region being part of its support.
fn mass_in(p: &KnownDensity, region: Option<&Region>) -> Result<f64> {
    match region {
        None => Ok(0.0),
        Some(r) => integrate_over(r, |x| p.pdf(x)),
    }
}

/// `∫ p` over the support of `p`; 1 up to truncation and quadrature error.
pub fn normalization(p: &KnownDensity) -> Result<f64> {
    p.validate()?;
    integrate_over(&p.support(), |x| p.pdf(x))
}

/// `∫ p^α q^(1-α)` by quadrature over the common support.
///
/// When `α > 1` (resp. `α < 0`) mass of `p` outside the support of `q`
/// (resp. of `q` outside `p`) makes the integral infinite; losing more than
/// [`MAX_MASS_LOSS`] this way is reported as [`Error::Divergent`]. Two
/// gaussians are integrated exactly around their tilted product instead, and
/// diverge only when its precision `αP_p + (1-α)P_q` is not positive.
pub fn true_d_alpha(p: &KnownDensity, q: &KnownDensity, alpha: f64) -> Result<f64> {
    check_pair(p, q)?;
    if !alpha.is_finite() {
        return Err(Error::Config(format!("alpha must be finite, got {alpha}")));
    }
    if let (Some(pp), Some(pq)) = (p.precision(), q.precision()) {
        let region = tilted_region(p, q, &pp, &pq, alpha).ok_or_else(|| {
            Error::Divergent(format!(
                "p^{alpha} q^{} is not integrable for these gaussians",
                1.0 - alpha
            ))
        })?;
        return integrate_over(&region, |x| (alpha * p.ln_pdf(x) + (1.0 - alpha) * q.ln_pdf(x)).exp());
    }
    let region = intersection(p, q);
    let heavy = if alpha > 1.0 {
        Some(p)
    } else if alpha < 0.0 {
        Some(q)
    } else {
        None
    };
    if let Some(h) = heavy {
        let lost = 1.0 - mass_in(h, region.as_ref())?;
        if lost > MAX_MASS_LOSS {
            return Err(Error::Divergent(format!(
                "mass {lost:.3e} lies where the other density vanishes"
            )));
        }
    }
    match region {
        None => Ok(0.0),
        Some(r) => integrate_over(&r, |x| (alpha * p.ln_pdf(x) + (1.0 - alpha) * q.ln_pdf(x)).exp()),
    }
}

/// Rényi-α divergence `ln(D_α) / (α - 1)` from [`true_d_alpha`].
pub fn true_renyi(p: &KnownDensity, q: &KnownDensity, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Err(Error::Config("alpha must differ from 1".into()));
    }
    Ok(true_d_alpha(p, q, alpha)?.ln() / (alpha - 1.0))
}

/// `√∫ (p - q)²` by quadrature over the union of the supports, split at
/// every support boundary.
pub fn true_l2(p: &KnownDensity, q: &KnownDensity) -> Result<f64> {
    Ok(true_l2_squared(p, q)?.max(0.0).sqrt())
}

pub fn true_l2_squared(p: &KnownDensity, q: &KnownDensity) -> Result<f64> {
    check_pair(p, q)?;
    let integrand = |x: &[f64]| (p.pdf(x) - q.pdf(x)).powi(2);
    let (sp, sq) = (p.support(), q.support());
    if p.dim() == 1 {
        let mut cuts = vec![sp[0].0, sp[0].1, sq[0].0, sq[0].1];
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        return cuts
            .windows(2)
            .map(|w| integrate_over(&[(w[0], w[1])], integrand))
            .sum();
    }
    let bounds: Region = sp
        .iter()
        .zip(&sq)
        .map(|(a, b)| (a.0.min(b.0), a.1.max(b.1)))
        .collect();
    integrate_over(&bounds, integrand)
}

/// `E[u^γ]` for `u ~ Erlang(k, λ)`: `λ^(-γ) Γ(k+γ) / Γ(k)`.
pub fn erlang_moment(k: usize, lambda: f64, gamma_exp: f64) -> Result<f64> {
    let kf = k as f64;
    if k == 0 || !(lambda > 0.0) || !lambda.is_finite() || !gamma_exp.is_finite() {
        return Err(Error::Domain(format!("need k >= 1 and lambda > 0, got k = {k}, lambda = {lambda}")));
    }
    if kf + gamma_exp <= 0.0 {
        return Err(Error::Domain(format!("moment {gamma_exp} of Erlang({k}) is infinite")));
    }
    Ok((-gamma_exp * lambda.ln() + ln_gamma(kf + gamma_exp) - ln_gamma(kf)).exp())
}

/// Monte Carlo estimate of [`erlang_moment`]: mean of `u^γ` over `n_draws`
/// draws, each the sum of `k` independent Exp(λ) variables.
pub fn empirical_erlang_moment(k: usize, lambda: f64, gamma_exp: f64, n_draws: usize, seed: u64) -> Result<f64> {
    erlang_moment(k, lambda, gamma_exp)?;
    if n_draws == 0 {
        return Err(Error::Config("n_draws must be at least 1".into()));
    }
    let exp = Exp::new(lambda).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = (0..n_draws)
        .map(|_| {
            let u: f64 = (0..k).map(|_| exp.sample(&mut rng)).sum();
            u.powf(gamma_exp)
        })
        .sum();
    Ok(total / n_draws as f64)
}

/// `Γ(k)² / (Γ(k-α+1) Γ(k+α-1))` straight from the gamma function, no logs.
/// Accurate for `k` up to about 80.
pub fn correction_factor_reference(k: usize, alpha: f64) -> f64 {
    let kf = k as f64;
    let g = gamma(kf);
    g / gamma(kf - alpha + 1.0) * (g / gamma(kf + alpha - 1.0))
}

/// Maximum trace over all row permutations of a (padded) count matrix, by
/// exhaustive search. Factorial time; meant for small checks.
pub fn brute_force_max_trace(counts: &[Vec<i64>]) -> i64 {
    let rows = counts.len();
    let cols = counts.iter().map(Vec::len).max().unwrap_or(0);
    let n = rows.max(cols);
    let at = |i: usize, j: usize| counts.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0);
    fn search(col: usize, used: &mut Vec<bool>, n: usize, at: &dyn Fn(usize, usize) -> i64) -> i64 {
        if col == n {
            return 0;
        }
        let mut best = i64::MIN;
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                best = best.max(at(i, col) + search(col + 1, used, n, at));
                used[i] = false;
            }
        }
        best
    }
    search(0, &mut vec![false; n], n, &at)
}
