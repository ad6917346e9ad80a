//! Estimate the Rényi-α and L2 divergence between two Gaussian samples and
//! compare with the exact values obtained by numerical integration.

use distdiv::oracle::{true_l2, true_renyi, KnownDensity};
use distdiv::{l2_divergence, renyi_divergence, Points};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

fn sample(n: usize, mean: f64, std: f64, rng: &mut ChaCha20Rng) -> Points {
    let d = Normal::new(mean, std).unwrap();
    let xs: Vec<f64> = (0..n).map(|_| d.sample(rng)).collect();
    Points::from_scalars(&xs)
}

fn main() -> distdiv::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let x = sample(5000, 0.0, 1.0, &mut rng);
    let y = sample(5000, 1.0, 1.5, &mut rng);

    let p = KnownDensity::Gaussian1D { mean: 0.0, std: 1.0 };
    let q = KnownDensity::Gaussian1D { mean: 1.0, std: 1.5 };

    for alpha in [0.5, 0.9, 1.5] {
        let est = renyi_divergence(&x, &y, 10, alpha)?;
        let exact = true_renyi(&p, &q, alpha)?;
        println!("renyi alpha={alpha:<4} estimate {est:.4}  exact {exact:.4}");
    }
    let est = l2_divergence(&x, &y, 10)?;
    println!("l2               estimate {est:.4}  exact {:.4}", true_l2(&p, &q)?);
    Ok(())
}
