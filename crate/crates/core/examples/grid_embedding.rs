//! Embed the 10x10 uniform parameter grid in two dimensions and check how
//! well the embedding preserves the order of the true parameters.

use distdiv::synth::{gen_param_grid, SynthFamily};
use distdiv::tasks::{mds_embed, spearman};
use distdiv::{divergence_matrix, EstimatorConfig};

fn main() -> distdiv::Result<()> {
    let grid = gen_param_grid(SynthFamily::UniformGrid, 0, 500)?;
    let w = divergence_matrix(&grid.dataset, &EstimatorConfig::renyi(0.5, 10))?;
    let e = mds_embed(&w, 2)?;

    let n = e.ids.len();
    let (mut emb, mut par) = (Vec::new(), Vec::new());
    for i in 0..n {
        for j in (i + 1)..n {
            emb.push(((e.coords[(i, 0)] - e.coords[(j, 0)]).powi(2) + (e.coords[(i, 1)] - e.coords[(j, 1)]).powi(2)).sqrt());
            let (a, b) = (&grid.params[i], &grid.params[j]);
            par.push(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
        }
    }
    println!("top eigenvalues: {:?}", &e.eigenvalues[..2]);
    println!("spearman(embedding distance, parameter distance) = {:.3}", spearman(&emb, &par));

    let svg = std::env::temp_dir().join("grid_embedding.svg");
    let coords: Vec<[f64; 2]> = (0..n).map(|i| [e.coords[(i, 0)], e.coords[(i, 1)]]).collect();
    let colors = distdiv::cli::param_colors(&grid.params);
    distdiv::cli::emit_svg_scatter(&coords, Some(&colors), &svg)?;
    println!("scatter plot written to {}", svg.display());
    Ok(())
}
