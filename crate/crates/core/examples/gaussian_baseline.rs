//! Compare the nonparametric estimator with the Gaussian closed form on data
//! that is far from Gaussian (beta distributed groups).

use distdiv::synth::{gen_param_grid, SynthFamily};
use distdiv::{divergence_matrix, gaussian_divergence_matrix, EstimatorConfig};

fn main() -> distdiv::Result<()> {
    let grid = gen_param_grid(SynthFamily::BetaGrid, 4, 800)?;
    let picks = [0, 9, 45, 90, 99];
    let ds = grid.dataset.subset(&picks)?;
    let cfg = EstimatorConfig::renyi(0.5, 10);
    let np = divergence_matrix(&ds, &cfg)?;
    let gauss = gaussian_divergence_matrix(&ds, &cfg)?;

    println!("{:>6} {:>6} {:>12} {:>12}", "p", "q", "nonparam", "gaussian");
    for i in 0..picks.len() {
        for j in (i + 1)..picks.len() {
            println!("{:>6} {:>6} {:>12.4} {:>12.4}", np.ids()[i], np.ids()[j], np.get(i, j), gauss.get(i, j));
        }
    }
    Ok(())
}
