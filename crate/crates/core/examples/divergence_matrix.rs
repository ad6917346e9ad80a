//! Build a symmetric divergence matrix over a small grid of Gaussian groups
//! and print it.

use distdiv::synth::{gen_param_grid, SynthFamily};
use distdiv::{divergence_matrix, Dataset, EstimatorConfig};

fn main() -> distdiv::Result<()> {
    let grid = gen_param_grid(SynthFamily::GaussianGrid, 3, 500)?;
    // Keep a handful of groups along the diagonal of the grid.
    let picks: Vec<usize> = (0..5).map(|i| i * 22).collect();
    let ds: Dataset = grid.dataset.subset(&picks)?;

    let w = divergence_matrix(&ds, &EstimatorConfig::renyi(0.5, 10))?;
    print!("{:>6}", "");
    for id in w.ids() {
        print!("{id:>9}");
    }
    println!();
    for (i, id) in w.ids().iter().enumerate() {
        print!("{id:>6}");
        for j in 0..w.len() {
            print!("{:>9.4}", w.get(i, j));
        }
        let p = &grid.params[picks[i]];
        println!("   mean {:.2} std {:.2}", p[0], p[1]);
    }
    Ok(())
}
