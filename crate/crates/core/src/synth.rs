//! Synthetic group families with known generating parameters.
//!
//! All randomness comes from ChaCha20 seeded with `seed`; group `i` draws from
//! stream `i` of that generator, so a group's points do not depend on how many
//! other groups are generated.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Beta, Distribution, Normal};

use crate::dataset::{Dataset, Group, Points};
use crate::error::{Error, Result};

pub const GRID_SIDE: usize = 10;
pub const DEFAULT_GRID_SAMPLES: usize = 2000;
pub const DEFAULT_SINE_SAMPLES: usize = 3000;
pub const SINE_NOISE_STD: f64 = 0.3;
pub const SINE_THETA_RANGE: (f64, f64) = (2.0, 4.0);
pub const ANOMALY_THETA: f64 = 8.0;

const MEAN_RANGE: (f64, f64) = (0.0, 1.0);
const STD_RANGE: (f64, f64) = (0.3, 0.7);
const BETA_RANGE: (f64, f64) = (0.7, 3.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthFamily {
    UniformGrid,
    GaussianGrid,
    BetaGrid,
    NoisySine,
    SineAnomaly,
}

impl FromStr for SynthFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ugrid" => Ok(SynthFamily::UniformGrid),
            "ggrid" => Ok(SynthFamily::GaussianGrid),
            "bgrid" => Ok(SynthFamily::BetaGrid),
            "sine" => Ok(SynthFamily::NoisySine),
            "sine-anom" => Ok(SynthFamily::SineAnomaly),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

/// Generated groups together with the parameters that produced them.
/// `params[i]` and `anomalous[i]` refer to `dataset.group(i)`.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub dataset: Dataset,
    pub param_names: Vec<String>,
    pub params: Vec<Vec<f64>>,
    pub anomalous: Option<Vec<bool>>,
}

fn group_rng(seed: u64, stream: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
        .collect()
}

fn check_count(what: &str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config(format!("{what} must be at least 1")));
    }
    Ok(())
}

struct Draft {
    id: String,
    points: Points,
    label: Option<String>,
    params: Vec<f64>,
    anomalous: bool,
}

fn assemble(mut drafts: Vec<Draft>, param_names: &[&str], flagged: bool) -> Result<SynthOutput> {
    drafts.sort_by(|a, b| a.id.cmp(&b.id));
    let mut params = Vec::with_capacity(drafts.len());
    let mut anomalous = Vec::with_capacity(drafts.len());
    let mut groups = Vec::with_capacity(drafts.len());
    for d in drafts {
        params.push(d.params);
        anomalous.push(d.anomalous);
        groups.push(Group::new(d.id, d.points, d.label)?);
    }
    Ok(SynthOutput {
        dataset: Dataset::new(groups)?,
        param_names: param_names.iter().map(|s| s.to_string()).collect(),
        params,
        anomalous: flagged.then_some(anomalous),
    })
}

/// 10×10 parameter grid of 1-D groups. Gaussian and uniform groups vary
/// (mean, std) over [0, 1] × [0.3, 0.7]; beta groups vary (a, b) over
/// [0.7, 3]². Group `g{10i+j:03}` uses the i-th first and j-th second parameter.
pub fn gen_param_grid(family: SynthFamily, seed: u64, samples_per_group: usize) -> Result<SynthOutput> {
    check_count("samples_per_group", samples_per_group)?;
    let (first, second, names) = match family {
        SynthFamily::UniformGrid | SynthFamily::GaussianGrid => (
            linspace(MEAN_RANGE, GRID_SIDE),
            linspace(STD_RANGE, GRID_SIDE),
            ["mean", "std"],
        ),
        SynthFamily::BetaGrid => (
            linspace(BETA_RANGE, GRID_SIDE),
            linspace(BETA_RANGE, GRID_SIDE),
            ["a", "b"],
        ),
        other => {
            return Err(Error::Config(format!("{other:?} is not a parameter grid family")));
        }
    };
    let mut drafts = Vec::with_capacity(GRID_SIDE * GRID_SIDE);
    for (i, &u) in first.iter().enumerate() {
        for (j, &v) in second.iter().enumerate() {
            let index = i * GRID_SIDE + j;
            let mut rng = group_rng(seed, index);
            let values: Vec<f64> = match family {
                SynthFamily::GaussianGrid => {
                    let dist = Normal::new(u, v).expect("positive std");
                    (0..samples_per_group).map(|_| dist.sample(&mut rng)).collect()
                }
                SynthFamily::UniformGrid => {
                    let half = 3f64.sqrt() * v;
                    (0..samples_per_group)
                        .map(|_| u - half + 2.0 * half * rng.random::<f64>())
                        .collect()
                }
                _ => {
                    let dist = Beta::new(u, v).expect("positive shape");
                    (0..samples_per_group).map(|_| dist.sample(&mut rng)).collect()
                }
            };
            drafts.push(Draft {
                id: format!("g{index:03}"),
                points: Points::from_scalars(&values),
                label: None,
                params: vec![u, v],
                anomalous: false,
            });
        }
    }
    assemble(drafts, &names, false)
}

fn sine_points(rng: &mut ChaCha20Rng, theta: f64, n: usize) -> Points {
    let noise = Normal::new(0.0, SINE_NOISE_STD).expect("positive std");
    let mut data = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let x = 2.0 * PI * rng.random::<f64>();
        let y = (theta * x).sin();
        data.push(x + noise.sample(rng));
        data.push(y + noise.sample(rng));
    }
    Points::new(data, 2).expect("2-D rows")
}

fn random_theta(rng: &mut ChaCha20Rng) -> f64 {
    rng.random_range(SINE_THETA_RANGE.0..SINE_THETA_RANGE.1)
}

/// Noisy sine curves `y = sin(θx)`, `x ~ U[0, 2π]`, `θ ~ U[2, 4]`, with
/// independent N(0, 0.3²) noise on both coordinates. Ids are `s000`, ...
pub fn gen_noisy_sine(n_groups: usize, samples_per_group: usize, seed: u64) -> Result<SynthOutput> {
    check_count("n_groups", n_groups)?;
    check_count("samples_per_group", samples_per_group)?;
    let drafts = (0..n_groups)
        .map(|i| {
            let mut rng = group_rng(seed, i);
            let theta = random_theta(&mut rng);
            Draft {
                id: format!("s{i:03}"),
                points: sine_points(&mut rng, theta, samples_per_group),
                label: None,
                params: vec![theta],
                anomalous: false,
            }
        })
        .collect();
    assemble(drafts, &["theta"], false)
}

/// Normal groups are noisy sines with `θ ~ U[2, 4]`; anomalous groups use
/// `θ = 8`. Each anomalous point looks ordinary, only the joint distribution
/// is unusual. Groups are labeled `normal` / `anomaly`.
pub fn gen_sine_anomaly_scenario(
    n_normal: usize,
    n_anom: usize,
    samples_per_group: usize,
    seed: u64,
) -> Result<SynthOutput> {
    check_count("n_normal", n_normal)?;
    check_count("n_anom", n_anom)?;
    check_count("samples_per_group", samples_per_group)?;
    let mut drafts = Vec::with_capacity(n_normal + n_anom);
    for i in 0..n_normal + n_anom {
        let mut rng = group_rng(seed, i);
        let anomalous = i >= n_normal;
        let (theta, id, label) = if anomalous {
            (ANOMALY_THETA, format!("anomaly-{:03}", i - n_normal), "anomaly")
        } else {
            (random_theta(&mut rng), format!("normal-{i:03}"), "normal")
        };
        drafts.push(Draft {
            id,
            points: sine_points(&mut rng, theta, samples_per_group),
            label: Some(label.to_string()),
            params: vec![theta],
            anomalous,
        });
    }
    assemble(drafts, &["theta"], true)
}

/// Labeled 1-D Gaussian groups: class `c` has mean `means[c]` and the common
/// `std`. Ids are `c{class}-{index:03}`, labels `c{class}`.
pub fn gen_gaussian_classes(
    means: &[f64],
    std: f64,
    groups_per_class: usize,
    samples_per_group: usize,
    seed: u64,
) -> Result<SynthOutput> {
    check_count("number of classes", means.len())?;
    check_count("groups_per_class", groups_per_class)?;
    check_count("samples_per_group", samples_per_group)?;
    if !(std > 0.0 && std.is_finite()) || means.iter().any(|m| !m.is_finite()) {
        return Err(Error::Config("class means must be finite and std positive".into()));
    }
    let mut drafts = Vec::with_capacity(means.len() * groups_per_class);
    for (c, &mean) in means.iter().enumerate() {
        let dist = Normal::new(mean, std).expect("positive std");
        for g in 0..groups_per_class {
            let mut rng = group_rng(seed, c * groups_per_class + g);
            let values: Vec<f64> = (0..samples_per_group).map(|_| dist.sample(&mut rng)).collect();
            drafts.push(Draft {
                id: format!("c{c}-{g:03}"),
                points: Points::from_scalars(&values),
                label: Some(format!("c{c}")),
                params: vec![mean, std],
                anomalous: false,
            });
        }
    }
    assemble(drafts, &["mean", "std"], false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(p: &Points) -> (f64, f64) {
        let n = p.len() as f64;
        let mean = p.as_slice().iter().sum::<f64>() / n;
        let var = p.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    }

    // 3-standard-error band per group and moment. With 200 bands a correct
    // generator still exceeds a few by chance; more than 3 has probability
    // about 1e-3.
    const MAX_EXCEEDANCES: usize = 3;

    fn exceedances(out: &SynthOutput, truth: impl Fn(&[f64]) -> (f64, f64, f64)) -> usize {
        let n = out.dataset.group(0).len() as f64;
        let mut bad = 0;
        for (g, p) in out.dataset.groups().iter().zip(&out.params) {
            // truth: (mean, std, standard error of the sample std)
            let (mean, sd, sd_se) = truth(p);
            let (m, s) = moments(g.points());
            bad += usize::from((m - mean).abs() > 3.0 * sd / n.sqrt());
            bad += usize::from((s - sd).abs() > 3.0 * sd_se);
        }
        bad
    }

    #[test]
    fn gaussian_grid_moments() {
        let out = gen_param_grid(SynthFamily::GaussianGrid, 3, DEFAULT_GRID_SAMPLES).unwrap();
        assert_eq!(out.dataset.len(), 100);
        assert!(out.dataset.groups().iter().all(|g| g.len() == DEFAULT_GRID_SAMPLES));
        assert_eq!(out.params[0], vec![0.0, 0.3]);
        assert_eq!(out.params[99], vec![1.0, 0.7]);
        let n = DEFAULT_GRID_SAMPLES as f64;
        let bad = exceedances(&out, |p| (p[0], p[1], p[1] / (2.0 * (n - 1.0)).sqrt()));
        assert!(bad <= MAX_EXCEEDANCES, "{bad} exceedances");
    }

    #[test]
    fn uniform_grid_moments_and_bounds() {
        let out = gen_param_grid(SynthFamily::UniformGrid, 5, DEFAULT_GRID_SAMPLES).unwrap();
        for (g, p) in out.dataset.groups().iter().zip(&out.params) {
            let half = 3f64.sqrt() * p[1];
            assert!(g.points().as_slice().iter().all(|&v| v >= p[0] - half && v <= p[0] + half));
        }
        // uniform: Var(s²) = 0.8 σ⁴ / n, so se(s) = σ √(0.8 / 4n)
        let n = DEFAULT_GRID_SAMPLES as f64;
        let bad = exceedances(&out, |p| (p[0], p[1], p[1] * (0.8 / (4.0 * n)).sqrt()));
        assert!(bad <= MAX_EXCEEDANCES, "{bad} exceedances");
    }

    #[test]
    fn beta_grid_support_and_moments() {
        let out = gen_param_grid(SynthFamily::BetaGrid, 1, DEFAULT_GRID_SAMPLES).unwrap();
        assert_eq!(out.params[0], vec![0.7, 0.7]);
        for g in out.dataset.groups() {
            assert!(g.points().as_slice().iter().all(|&v| v > 0.0 && v < 1.0));
        }
        let n = DEFAULT_GRID_SAMPLES as f64;
        let bad = exceedances(&out, |p| {
            let (a, b) = (p[0], p[1]);
            let s = a + b;
            let var = a * b / (s * s * (s + 1.0));
            // fourth central moment of a beta distribution
            let m4 = 3.0 * a * b * (a * b * (s - 6.0) + 2.0 * s * s) / (s.powi(4) * (s + 1.0) * (s + 2.0) * (s + 3.0));
            (a / s, var.sqrt(), ((m4 - var * var) / n).sqrt() / (2.0 * var.sqrt()))
        });
        assert!(bad <= MAX_EXCEEDANCES, "{bad} exceedances");
    }

    #[test]
    fn sine_ranges() {
        let out = gen_noisy_sine(20, DEFAULT_SINE_SAMPLES, 9).unwrap();
        assert_eq!(out.dataset.dim(), 2);
        for (g, p) in out.dataset.groups().iter().zip(&out.params) {
            assert!((2.0..4.0).contains(&p[0]));
            for row in g.points().rows() {
                assert!(row[0] > -1.5 && row[0] < 2.0 * PI + 1.5);
            }
        }
    }

    #[test]
    fn anomaly_points_look_normal() {
        let out = gen_sine_anomaly_scenario(40, 10, 1000, 2).unwrap();
        assert_eq!(out.dataset.len(), 50);
        let flags = out.anomalous.as_ref().unwrap();
        assert_eq!(flags.iter().filter(|&&f| f).count(), 10);
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for (g, _) in out.dataset.groups().iter().zip(flags).filter(|(_, &f)| !f) {
            for row in g.points().rows() {
                for a in 0..2 {
                    lo[a] = lo[a].min(row[a]);
                    hi[a] = hi[a].max(row[a]);
                }
            }
        }
        for (g, _) in out.dataset.groups().iter().zip(flags).filter(|(_, &f)| f) {
            assert_eq!(g.label(), Some("anomaly"));
            for row in g.points().rows() {
                for a in 0..2 {
                    let margin = 0.1 * (hi[a] - lo[a]);
                    assert!(row[a] >= lo[a] - margin && row[a] <= hi[a] + margin);
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = gen_noisy_sine(3, 100, 11).unwrap();
        let b = gen_noisy_sine(3, 100, 11).unwrap();
        assert_eq!(a.dataset, b.dataset);
        let c = gen_noisy_sine(3, 100, 12).unwrap();
        assert_ne!(a.dataset, c.dataset);
        // a group does not depend on how many siblings were generated
        let d = gen_noisy_sine(5, 100, 11).unwrap();
        assert_eq!(a.dataset.group(2), d.dataset.group(2));
    }

    #[test]
    fn classes() {
        let out = gen_gaussian_classes(&[0.0, 1.0, 2.0, 3.0], 0.5, 20, 100, 0).unwrap();
        assert_eq!(out.dataset.len(), 80);
        assert_eq!(out.dataset.labels().unwrap()[25], "c1");
    }
}
