//! Groups of points along sin(θx) for varying θ. A one dimensional embedding
//! of the divergence matrix should recover the ordering of θ.

use distdiv::synth::gen_noisy_sine;
use distdiv::tasks::{mds_embed, spearman};
use distdiv::{divergence_matrix, EstimatorConfig};

fn main() -> distdiv::Result<()> {
    let s = gen_noisy_sine(30, 1000, 5)?;
    let w = divergence_matrix(&s.dataset, &EstimatorConfig::renyi(0.5, 10))?;
    let e = mds_embed(&w, 1)?;
    let coord: Vec<f64> = (0..e.ids.len()).map(|i| e.coords[(i, 0)]).collect();
    let theta: Vec<f64> = s.params.iter().map(|p| p[0]).collect();
    println!("|spearman(first coordinate, theta)| = {:.3}", spearman(&coord, &theta).abs());
    Ok(())
}
