//! Four classes of Gaussian groups with shifted means. Cluster them without
//! labels, then classify them with cross-validated k-NN voting.

use distdiv::synth::gen_gaussian_classes;
use distdiv::tasks::{cluster_trace_accuracy, cross_validate, spectral_cluster};
use distdiv::{divergence_matrix, EstimatorConfig};

fn main() -> distdiv::Result<()> {
    let s = gen_gaussian_classes(&[0.0, 1.0, 2.0, 3.0], 0.5, 15, 400, 11)?;
    let labels = s.dataset.labels()?;
    let w = divergence_matrix(&s.dataset, &EstimatorConfig::renyi(0.5, 10))?;

    let clusters = spectral_cluster(&w, 4, 11)?;
    println!("spectral clustering trace accuracy {:.3}", cluster_trace_accuracy(&labels, &clusters)?);

    let cv = cross_validate(&w, &labels, 5, 7, 11)?;
    println!("5-fold k-NN accuracy {:.3}", cv.accuracy);
    Ok(())
}
