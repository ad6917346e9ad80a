#![allow(dead_code)]

use distdiv::Points;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// `n` draws from N(mean, LLᵀ), `l` the lower Cholesky factor, row-major.
pub fn gaussian(n: usize, mean: &[f64], l: &[f64], seed: u64) -> Points {
    let d = mean.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * d);
    let mut z = vec![0.0; d];
    for _ in 0..n {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        for r in 0..d {
            data.push(mean[r] + (0..=r).map(|c| l[r * d + c] * z[c]).sum::<f64>());
        }
    }
    Points::new(data, d).unwrap()
}

pub fn gaussian_1d(n: usize, mean: f64, std: f64, seed: u64) -> Points {
    gaussian(n, &[mean], &[std], seed)
}

pub fn isotropic(n: usize, mean: &[f64], seed: u64) -> Points {
    let d = mean.len();
    let l: Vec<f64> = (0..d * d).map(|i| if i / d == i % d { 1.0 } else { 0.0 }).collect();
    gaussian(n, mean, &l, seed)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
