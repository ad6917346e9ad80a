//! Machine learning on divergence matrices: embedding, clustering,
//! classification and group anomaly detection, plus their evaluation metrics.

mod anomaly;
mod classify;
mod hungarian;
mod mds;
mod spectral;
mod stats;

pub use anomaly::{anomaly_scores, anomaly_split, auc, AnomalyScores, DEFAULT_K_ANOM};
pub use classify::{cross_validate, knn_classify, CvOutcome, DEFAULT_K_VOTE};
pub use hungarian::{cluster_trace_accuracy, max_trace, min_cost_assignment};
pub use mds::{mds_embed, Embedding};
pub use spectral::{kmeans, spectral_cluster, ClusterAssignment, KMEANS_RESTARTS, LOCAL_SCALE_NEIGHBOR};
pub use stats::{midranks, spearman};

use crate::error::{Error, Result};
use crate::estimators::DivergenceMatrix;

pub(crate) fn require_symmetric(w: &DivergenceMatrix) -> Result<()> {
    let v = w.values();
    let n = w.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (v[(i, j)], v[(j, i)]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::Contract(format!(
                    "divergence matrix is not symmetric at ({}, {}): {a} vs {b}",
                    w.ids()[i],
                    w.ids()[j]
                )));
            }
        }
    }
    Ok(())
}
