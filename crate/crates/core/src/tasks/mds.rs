use nalgebra::{DMatrix, SymmetricEigen};

use super::require_symmetric;
use crate::error::{Error, Result};
use crate::estimators::DivergenceMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub ids: Vec<String>,
    /// I × m coordinates, one row per group.
    pub coords: DMatrix<f64>,
    /// Full spectrum of the double-centered matrix, descending. Negative
    /// entries mean the divergences are not Euclidean distances.
    pub eigenvalues: Vec<f64>,
}

/// Classical (Torgerson) multidimensional scaling into `m` dimensions.
///
/// `B = -½ J W² J` is eigendecomposed and the top `m` eigenvectors are scaled
/// by `√max(λ, 0)`. Each axis is oriented so its largest-magnitude
/// coordinate is positive.
pub fn mds_embed(w: &DivergenceMatrix, m: usize) -> Result<Embedding> {
    require_symmetric(w)?;
    let n = w.len();
    if m == 0 || m >= n {
        return Err(Error::Contract(format!(
            "target dimension must be in 1..={}, got {m}",
            n.saturating_sub(1)
        )));
    }
    let sq = w.values().map(|v| v * v);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    // symmetrize away rounding before the eigen-solve
    let b = (&b + b.transpose()) * 0.5;
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]));

    let mut coords = DMatrix::zeros(n, m);
    for (axis, &e) in order.iter().take(m).enumerate() {
        let scale = eig.eigenvalues[e].max(0.0).sqrt();
        let mut col: Vec<f64> = eig.eigenvectors.column(e).iter().map(|v| v * scale).collect();
        let pivot = col
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc })
            .0;
        if col[pivot] < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
        for (i, v) in col.into_iter().enumerate() {
            coords[(i, axis)] = v;
        }
    }
    Ok(Embedding {
        ids: w.ids().to_vec(),
        coords,
        eigenvalues: order.iter().map(|&e| eig.eigenvalues[e]).collect(),
    })
}
