//! Score test groups by the divergence to their k-th nearest training group
//! and measure how well the score separates anomalous groups.

use distdiv::synth::gen_sine_anomaly_scenario;
use distdiv::tasks::{anomaly_scores, anomaly_split, auc, DEFAULT_K_ANOM};
use distdiv::{cross_divergences, EstimatorConfig};

fn main() -> distdiv::Result<()> {
    let s = gen_sine_anomaly_scenario(40, 10, 1000, 2)?;
    let flags = s.anomalous.clone().expect("scenario carries flags");
    let (train, test) = anomaly_split(&flags, 0.75, 2);
    let train_ds = s.dataset.subset(&train)?;
    let test_ds = s.dataset.subset(&test)?;

    let w = cross_divergences(&test_ds, &train_ds, &EstimatorConfig::renyi(0.5, 10))?;
    let scores = anomaly_scores(&w, DEFAULT_K_ANOM)?;
    let truth: Vec<bool> = test.iter().map(|&i| flags[i]).collect();
    for (id, sc) in scores.ids.iter().zip(&scores.score) {
        println!("{id:>12} {sc:8.4}");
    }
    println!("AUC {:.3}", auc(&scores.score, &truth)?);
    Ok(())
}
