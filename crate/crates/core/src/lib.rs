//! Nonparametric estimation of Rényi-α and L2 divergences between
//! continuous distributions known only through samples, and machine learning
//! on the resulting divergence matrices.
//!
//! ```
//! use distdiv::{renyi_divergence, Points};
//!
//! let x = Points::from_scalars(&[0.0, 2.0]);
//! let y = Points::from_scalars(&[1.0]);
//! let r = renyi_divergence(&x, &y, 1, 0.5).unwrap();
//! assert!((r - 0.2100).abs() < 1e-3);
//! ```

pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod knn;
pub mod oracle;
pub mod synth;
pub mod tasks;

pub use baselines::{fit_gaussian, gaussian_divergence_matrix, gaussian_l2, gaussian_renyi, GaussianFit};
pub use dataset::{load_dataset, load_matrix, save_dataset, save_matrix, Dataset, Group, Points};
pub use error::{Error, Result};
pub use estimators::{
    correction_factor, cross_divergences, divergence_matrix, estimate_d_alpha, estimate_l2_squared,
    l2_divergence, renyi_divergence, CrossDivergences, DivergenceMatrix, EstimatorConfig, EstimatorKind,
    Provenance,
};
pub use knn::NeighborIndex;
