use ndarray::{Array1, ArrayView2};
use serde::Serialize;

use super::train::confidences;
use crate::error::Result;
use crate::net::{Checkpoint, NetworkParams};
use crate::objectives::{source_row_caps, target_weights, source_class_weights};
use crate::ot::{build_cost_matrix, pot_exact};
use crate::prototypes::compute_prototypes;
use crate::scenario::ScenarioDataset;

/// `2 a_c a_p / (a_c + a_p)`, zero when both are zero.
pub fn h_score(common_accuracy: f64, private_accuracy: f64) -> f64 {
    let denom = common_accuracy + private_accuracy;
    if denom > 0.0 {
        2.0 * common_accuracy * private_accuracy / denom
    } else {
        0.0
    }
}

/// Argmax class, or `classes` (unknown) when the top probability is below `xi`.
pub fn predict(params: &NetworkParams, inputs: ArrayView2<'_, f64>, xi: f64) -> Result<Vec<usize>> {
    let probs = params.forward(inputs)?.probabilities;
    let unknown = probs.ncols();
    Ok(probs
        .outer_iter()
        .map(|row| {
            let (best, p) = row
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc });
            if p < xi { unknown } else { best }
        })
        .collect())
}

/// Target-domain metrics and weight diagnostics of a trained network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// Accuracy per evaluation class; the last entry is the unknown class.
    /// Classes without target samples are `NaN`.
    pub per_class_accuracy: Vec<f64>,
    /// Mean per-class accuracy over shared classes.
    pub common_accuracy: f64,
    /// Recall of the unknown class; `NaN` without private target samples.
    pub private_accuracy: f64,
    pub h_score: f64,
    pub overall_accuracy: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_trajectory: Vec<f64>,
    pub beta_trajectory: Vec<f64>,
    /// Class weights from an exact full-data solve with the final estimates.
    pub class_weights: Vec<f64>,
    pub mean_ws_common: f64,
    pub mean_ws_private: f64,
    pub mean_wt_known: f64,
    pub mean_wt_unknown: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 { f64::NAN } else { sum / count as f64 }
}

fn trajectory(ck: &Checkpoint, key: &str) -> Vec<f64> {
    ck.meta
        .get(key)
        .map(|s| s.split(',').filter_map(|v| v.parse().ok()).collect())
        .unwrap_or_default()
}

/// Scores `checkpoint` on the target samples of `data` with threshold `xi`.
pub fn evaluate(checkpoint: &Checkpoint, data: &ScenarioDataset, xi: f64) -> Result<EvalReport> {
    let params = &checkpoint.params;
    let classes = data.source_classes;
    let predictions = predict(params, data.target_x.view(), xi)?;

    let mut hits = vec![0usize; classes + 1];
    let mut totals = vec![0usize; classes + 1];
    for (i, &pred) in predictions.iter().enumerate() {
        let truth = data.target_eval_label(i);
        totals[truth] += 1;
        hits[truth] += usize::from(pred == truth);
    }
    let per_class_accuracy: Vec<f64> = hits
        .iter()
        .zip(&totals)
        .map(|(&h, &t)| if t > 0 { h as f64 / t as f64 } else { f64::NAN })
        .collect();
    let common = data.common_classes();
    let common_accuracy = mean(common.iter().map(|&k| per_class_accuracy[k]));
    let private_accuracy = per_class_accuracy[classes];
    let h = if private_accuracy.is_nan() { f64::NAN } else { h_score(common_accuracy, private_accuracy) };
    let overall_accuracy = hits.iter().sum::<usize>() as f64 / predictions.len() as f64;

    let alpha = checkpoint.meta_value::<f64>("alpha").unwrap_or(data.truth_alpha);
    let beta = checkpoint.meta_value::<f64>("beta").unwrap_or(1.0);

    // Weights from the exact full-data prototype problem.
    let unit = checkpoint.meta_value::<bool>("normalize_features").unwrap_or(false);
    let source_features = params.embedding(data.source_x.view(), unit)?;
    let target_features = params.embedding(data.target_x.view(), unit)?;
    let bank = compute_prototypes(source_features.view(), &data.source_y, classes)?;
    let n = data.target_x.nrows();
    let caps = source_row_caps(bank.class_mass(), alpha, beta);
    let q = Array1::from_elem(n, 1.0 / n as f64);
    let cost = build_cost_matrix(bank.prototypes(), target_features.view())?;
    let plan = pot_exact(caps.view(), q.view(), &cost, alpha.min(caps.sum()))?;
    let w_s = source_class_weights(&plan, alpha, classes)?;
    let w_t = target_weights(&plan, alpha, n)?;
    let is_common = |k: usize| common.contains(&k);

    Ok(EvalReport {
        per_class_accuracy,
        common_accuracy,
        private_accuracy,
        h_score: h,
        overall_accuracy,
        alpha,
        beta,
        alpha_trajectory: trajectory(checkpoint, "alpha_trajectory"),
        beta_trajectory: trajectory(checkpoint, "beta_trajectory"),
        mean_ws_common: mean((0..classes).filter(|&k| is_common(k)).map(|k| w_s[k])),
        mean_ws_private: mean((0..classes).filter(|&k| !is_common(k)).map(|k| w_s[k])),
        mean_wt_known: mean((0..n).filter(|&i| data.target_known[i]).map(|i| w_t[i])),
        mean_wt_unknown: mean((0..n).filter(|&i| !data.target_known[i]).map(|i| w_t[i])),
        class_weights: w_s.to_vec(),
    })
}

/// Mean top-softmax confidence over `inputs`.
pub fn mean_confidence(params: &NetworkParams, inputs: ArrayView2<'_, f64>) -> Result<f64> {
    let probs = params.forward(inputs)?.probabilities;
    Ok(confidences(probs.view()).mean().unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_score_cases() {
        assert_eq!(h_score(1.0, 1.0), 1.0);
        assert_eq!(h_score(0.7, 0.0), 0.0);
        assert_eq!(h_score(0.0, 0.0), 0.0);
        assert!((h_score(0.8, 0.6) - 0.685_714_285_714_285_7).abs() < 1e-15);
    }
}
