use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound applied to probabilities inside every logarithm.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Coefficients of the transport, entropy and negative-entropy terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { eta1: 5.0, eta2: 0.01, eta3: 2.0 }
    }
}

impl LossWeights {
    /// All coefficients zero: plain supervised training on the source.
    pub fn source_only() -> Self {
        Self { eta1: 0.0, eta2: 0.0, eta3: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta1", self.eta1), ("eta2", self.eta2), ("eta3", self.eta3)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        Ok(())
    }
}

fn check_probabilities(probs: ArrayView2<'_, f64>, weights: usize) -> Result<()> {
    if probs.nrows() != weights {
        return Err(Error::DimensionMismatch { expected: probs.nrows(), found: weights });
    }
    for row in probs.outer_iter() {
        if row.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument("probabilities must be nonnegative".into()));
        }
        if (row.sum() - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probability row sums to {}", row.sum())));
        }
    }
    Ok(())
}

/// `-p log p` with the floor applied inside the log; zero at `p = 0`.
fn entropy_term(p: f64) -> f64 {
    -p * p.max(PROBABILITY_FLOOR).ln()
}

fn weighted_entropy(probs: ArrayView2<'_, f64>, w: ArrayView1<'_, f64>) -> Result<f64> {
    check_probabilities(probs, w.len())?;
    Ok(probs
        .outer_iter()
        .zip(w)
        .map(|(row, &wi)| wi * row.iter().map(|&p| entropy_term(p)).sum::<f64>())
        .sum())
}

/// `-sum_i w^t_i sum_j p_ij log p_ij`.
pub fn reweighted_entropy_loss(probs: ArrayView2<'_, f64>, w_t: ArrayView1<'_, f64>) -> Result<f64> {
    weighted_entropy(probs, w_t)
}

/// Same entropy as [`reweighted_entropy_loss`] with unknown weights; it is
/// subtracted in the total loss.
pub fn negative_entropy_loss(probs: ArrayView2<'_, f64>, w_u: ArrayView1<'_, f64>) -> Result<f64> {
    weighted_entropy(probs, w_u)
}

/// `-sum_i w^s_{y_i} log p_{i, y_i}`.
pub fn reweighted_ce_loss(probs: ArrayView2<'_, f64>, labels: &[usize], w_s: ArrayView1<'_, f64>) -> Result<f64> {
    check_probabilities(probs, labels.len())?;
    let classes = probs.ncols();
    if w_s.len() != classes {
        return Err(Error::DimensionMismatch { expected: classes, found: w_s.len() });
    }
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        if y >= classes {
            return Err(Error::LabelOutOfRange { label: y, classes });
        }
        total -= w_s[y] * probs[[i, y]].max(PROBABILITY_FLOOR).ln();
    }
    Ok(total)
}

/// `rce + eta2 * pe - eta3 * ne + eta1 * ot`.
pub fn total_loss(rce: f64, pe: f64, ne: f64, ot: f64, weights: &LossWeights) -> f64 {
    rce + (weights.eta2 * pe - weights.eta3 * ne) + weights.eta1 * ot
}
