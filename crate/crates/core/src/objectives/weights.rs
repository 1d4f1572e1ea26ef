use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::ot::TransportPlan;

/// Weights read off a transport plan between class prototypes and a batch
/// of targets.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVectors {
    /// Likely-known score per target, summing to the batch size.
    pub target_known: Array1<f64>,
    /// Likely-unknown score per target, in `[0, 1]`.
    pub target_unknown: Array1<f64>,
    /// Likely-common score per source class, summing to `L`.
    pub source_class: Array1<f64>,
}

impl WeightVectors {
    pub fn from_plan(plan: &TransportPlan, alpha: f64, keep_fraction: f64) -> Result<Self> {
        let target_known = target_weights(plan, alpha, plan.cols())?;
        let target_unknown = unknown_weights(target_known.view(), keep_fraction)?;
        let source_class = source_class_weights(plan, alpha, plan.rows())?;
        Ok(Self { target_known, target_unknown, source_class })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// `w^t_i = (b / alpha) * column_sum_i`.
pub fn target_weights(plan: &TransportPlan, alpha: f64, batch_size: usize) -> Result<Array1<f64>> {
    check_alpha(alpha)?;
    if plan.cols() != batch_size {
        return Err(Error::DimensionMismatch { expected: batch_size, found: plan.cols() });
    }
    Ok(plan.col_sums() * (batch_size as f64 / alpha))
}

/// `[1 - w^t]_+`, keeping only the `ceil(keep_fraction * b)` largest values.
/// Ties go to the lower index.
pub fn unknown_weights(w_t: ArrayView1<'_, f64>, keep_fraction: f64) -> Result<Array1<f64>> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("keep_fraction {keep_fraction} outside (0, 1]")));
    }
    let raw: Vec<f64> = w_t.iter().map(|&w| (1.0 - w).max(0.0)).collect();
    let keep = retained_count(raw.len(), keep_fraction);
    let mut order: Vec<usize> = (0..raw.len()).collect();
    // Stable sort keeps lower indices first among equal values.
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
    let mut out = Array1::zeros(raw.len());
    for &i in order.iter().take(keep) {
        out[i] = raw[i];
    }
    Ok(out)
}

/// `ceil(keep_fraction * b)`, robust to rounding in the product.
pub fn retained_count(b: usize, keep_fraction: f64) -> usize {
    let exact = keep_fraction * b as f64;
    let rounded = exact.round();
    let count = if (exact - rounded).abs() < 1e-9 { rounded } else { exact.ceil() };
    (count as usize).min(b)
}

/// `w^s_k = (L / alpha) * row_sum_k`.
pub fn source_class_weights(plan: &TransportPlan, alpha: f64, classes: usize) -> Result<Array1<f64>> {
    check_alpha(alpha)?;
    if plan.rows() != classes {
        return Err(Error::DimensionMismatch { expected: classes, found: plan.rows() });
    }
    Ok(plan.row_sums() * (classes as f64 / alpha))
}
