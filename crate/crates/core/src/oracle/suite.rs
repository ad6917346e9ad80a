use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::baselines::{gaussian_l2, gaussian_renyi, GaussianFit};
use crate::dataset::Points;
use crate::estimators::correction_factor;
use crate::knn::NeighborIndex;
use crate::tasks::max_trace;

pub const ERLANG_DRAWS: usize = 100_000;
pub const ERLANG_TOLERANCE: f64 = 0.02;
pub const ERLANG_KS: [usize; 3] = [3, 5, 20];
pub const ERLANG_GAMMAS: [f64; 4] = [-2.0, -1.0, -0.5, 0.5];
pub const CORRECTION_ALPHAS: [f64; 6] = [-0.5, 0.0, 0.2, 0.5, 0.8, 1.5];
pub const BASELINE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: impl Into<String>, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => CheckOutcome::new(name, passed, detail),
            Err(e) => CheckOutcome::new(name, false, format!("error: {e}")),
        }
    }
}

fn test_densities() -> Vec<KnownDensity> {
    vec![
        KnownDensity::Gaussian1D { mean: 0.0, std: 1.0 },
        KnownDensity::Gaussian1D { mean: 0.3, std: 2.5 },
        KnownDensity::Uniform1D { low: 0.0, high: 1.0 },
        KnownDensity::Uniform1D { low: -2.0, high: 5.0 },
        KnownDensity::Beta1D { a: 0.7, b: 0.7 },
        KnownDensity::Beta1D { a: 2.0, b: 3.0 },
        KnownDensity::Beta1D { a: 0.7, b: 3.0 },
        KnownDensity::Gaussian2D { mean: [0.5, -1.0], cov: [[1.0, 0.3], [0.3, 0.5]] },
    ]
}

fn check_normalization() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for p in test_densities() {
        worst = worst.max((normalization(&p)? - 1.0).abs());
    }
    Ok((worst <= 1e-8, format!("max |∫p - 1| = {worst:.2e}")))
}

fn check_self_divergence() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for p in test_densities() {
        for alpha in [0.2, 0.5, 0.8, 1.5] {
            worst = worst.max((true_d_alpha(&p, &p, alpha)? - 1.0).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max |D(p,p) - 1| = {worst:.2e}")))
}

fn check_known_integrals() -> Result<(bool, String)> {
    let n0 = KnownDensity::Gaussian1D { mean: 0.0, std: 1.0 };
    let n1 = KnownDensity::Gaussian1D { mean: 1.0, std: 1.0 };
    let u = |low, high| KnownDensity::Uniform1D { low, high };
    let l2_shift = ((2.0 - 2.0 * (-0.25f64).exp()) / (4.0 * std::f64::consts::PI).sqrt()).sqrt();
    let cases = [
        ("D_0.5 N(0,1)|N(1,1)", true_d_alpha(&n0, &n1, 0.5)?, (-0.125f64).exp()),
        ("D_0.5 U[0,1]|U[.5,1.5]", true_d_alpha(&u(0.0, 1.0), &u(0.5, 1.5), 0.5)?, 0.5),
        ("L2 N(0,1)|N(1,1)", true_l2(&n0, &n1)?, l2_shift),
        ("L2 U[0,1]|U[1,2]", true_l2(&u(0.0, 1.0), &u(1.0, 2.0))?, 2f64.sqrt()),
        ("L2 p|p", true_l2(&n0, &n0)?, 0.0),
    ];
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (name, got, want) in cases {
        let err = (got - want).abs() / want.abs().max(1.0);
        worst = worst.max(err);
        detail.push(format!("{name}={got:.6}"));
    }
    Ok((worst <= 1e-8, format!("{} (max rel err {worst:.1e})", detail.join(", "))))
}

fn check_correction_factor() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut domain_ok = true;
    for k in 1..=50 {
        for alpha in CORRECTION_ALPHAS {
            let valid = (k as f64) > (alpha - 1.0f64).abs();
            match correction_factor(k, alpha) {
                Ok(b) if valid => {
                    let r = correction_factor_reference(k, alpha);
                    worst = worst.max((b / r - 1.0).abs());
                }
                Err(Error::Domain(_)) if !valid => {}
                _ => domain_ok = false,
            }
        }
    }
    let exact = correction_factor(5, 0.0)? == 0.8;
    Ok((
        worst <= 1e-12 && domain_ok && exact,
        format!("max rel err {worst:.1e}, B(5,0) == 0.8: {exact}, domain errors as expected: {domain_ok}"),
    ))
}

/// Relative error of the empirical against the analytic Erlang moment for
/// each `(k, γ)` cell with `k + γ > 0`.
pub fn erlang_grid(seed: u64) -> Result<Vec<(usize, f64, f64)>> {
    let mut out = Vec::new();
    for (i, &k) in ERLANG_KS.iter().enumerate() {
        for (j, &g) in ERLANG_GAMMAS.iter().enumerate() {
            if k as f64 + g <= 0.0 {
                continue;
            }
            let lambda = 2.0;
            let exact = erlang_moment(k, lambda, g)?;
            let cell_seed = seed.wrapping_add((i * ERLANG_GAMMAS.len() + j) as u64);
            let mc = empirical_erlang_moment(k, lambda, g, ERLANG_DRAWS, cell_seed)?;
            out.push((k, g, (mc / exact - 1.0).abs()));
        }
    }
    Ok(out)
}

/// Only cells where `u^γ` has finite variance (`k + 2γ > 0`) are gated: in
/// the others a Monte Carlo mean converges too slowly for a fixed band.
fn check_erlang() -> Result<(bool, String)> {
    let grid = erlang_grid(0)?;
    let (gated, heavy): (Vec<_>, Vec<_>) = grid.iter().partition(|(k, g, _)| *k as f64 + 2.0 * g > 0.0);
    let (k, g, worst) = gated
        .iter()
        .copied()
        .copied()
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .expect("nonempty grid");
    let analytic = (erlang_moment(4, 3.0, 0.0)? - 1.0).abs() < 1e-14
        && (erlang_moment(4, 3.0, 1.0)? - 4.0 / 3.0).abs() < 1e-14;
    let skipped: Vec<String> = heavy
        .iter()
        .map(|(k, g, e)| format!("k={k} γ={g} ({:.1}%)", e * 100.0))
        .collect();
    Ok((
        worst <= ERLANG_TOLERANCE && analytic,
        format!(
            "{} cells, worst rel err {:.2}% at k={k}, γ={g}; ungated infinite-variance cells: {}",
            gated.len(),
            worst * 100.0,
            skipped.join(", ")
        ),
    ))
}

fn random_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> (KnownDensity, GaussianFit) {
    if dim == 1 {
        let mean = rng.random_range(-1.0..1.0);
        let std: f64 = rng.random_range(0.5..2.0);
        let fit = GaussianFit::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, std * std))
            .expect("valid 1-D gaussian");
        (KnownDensity::Gaussian1D { mean, std }, fit)
    } else {
        let mean = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let a: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let c00 = a[0] * a[0] + a[1] * a[1] + 0.2;
        let c01 = a[0] * a[2] + a[1] * a[3];
        let c11 = a[2] * a[2] + a[3] * a[3] + 0.2;
        let fit = GaussianFit::new(
            DVector::from_column_slice(&mean),
            DMatrix::from_row_slice(2, 2, &[c00, c01, c01, c11]),
        )
        .expect("valid 2-D gaussian");
        (KnownDensity::Gaussian2D { mean, cov: [[c00, c01], [c01, c11]] }, fit)
    }
}

/// Largest absolute disagreement between the closed-form gaussian divergences
/// (Rényi at α = 0.5 and L2) and quadrature over `n_pairs` random pairs,
/// alternating 1-D and 2-D.
pub fn baseline_disagreement(n_pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..n_pairs {
        let dim = 1 + i % 2;
        let (p, fp) = random_gaussian(&mut rng, dim);
        let (q, fq) = random_gaussian(&mut rng, dim);
        worst = worst.max((gaussian_renyi(&fp, &fq, 0.5)? - true_renyi(&p, &q, 0.5)?).abs());
        worst = worst.max((gaussian_l2(&fp, &fq)? - true_l2(&p, &q)?).abs());
    }
    Ok(worst)
}

fn check_baselines() -> Result<(bool, String)> {
    let worst = baseline_disagreement(50, 0)?;
    Ok((worst <= BASELINE_TOLERANCE, format!("50 pairs, max abs diff {worst:.2e}")))
}

/// Number of random count matrices (up to 6×6) on which the assignment
/// solver's trace differs from exhaustive search.
pub fn hungarian_mismatches(n_cases: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_cases)
        .filter(|_| {
            let rows = rng.random_range(1..=6);
            let cols = rng.random_range(1..=6);
            let counts: Vec<Vec<i64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.random_range(0..60)).collect())
                .collect();
            max_trace(&counts) != brute_force_max_trace(&counts)
        })
        .count()
}

fn check_hungarian() -> Result<(bool, String)> {
    let bad = hungarian_mismatches(200, 0);
    Ok((bad == 0, format!("{bad} of 200 random matrices disagree")))
}

fn check_knn() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let rows: Vec<[f64; 2]> = (0..400).map(|_| [rng.random(), rng.random()]).collect();
    let points = Points::from_rows(&rows)?;
    let k = 7;
    let fast = NeighborIndex::build(&points)?.kth_nn_within(k)?;
    let mut bad = 0;
    for (i, a) in rows.iter().enumerate() {
        let mut d: Vec<f64> = rows
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            .collect();
        d.sort_by(f64::total_cmp);
        if d[k - 1] != fast[i] {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{bad} of 400 k-th neighbor distances differ from brute force")))
}

/// Runs every oracle self-check and cross-check.
pub fn run_suite() -> Vec<CheckOutcome> {
    let checks: [(&str, fn() -> Result<(bool, String)>); 8] = [
        ("density normalization", check_normalization),
        ("self divergence", check_self_divergence),
        ("known integrals", check_known_integrals),
        ("correction factor", check_correction_factor),
        ("erlang moments", check_erlang),
        ("gaussian closed forms", check_baselines),
        ("assignment vs brute force", check_hungarian),
        ("k-NN vs brute force", check_knn),
    ];
    checks
        .iter()
        .map(|(name, f)| CheckOutcome::from_result(*name, f()))
        .collect()
}
