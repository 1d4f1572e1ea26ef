use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible transported mass for a batch of `b` targets: two atoms.
pub fn alpha_floor(batch_size: usize) -> f64 {
    (2.0 / batch_size as f64).min(1.0)
}

/// Fraction of targets whose confidence reaches `tau1`, clamped to `[floor, 1]`.
pub fn estimate_alpha(confidences: ArrayView1<'_, f64>, tau1: f64, floor: f64) -> f64 {
    if confidences.is_empty() {
        return floor;
    }
    let hits = confidences.iter().filter(|&&c| c >= tau1).count();
    (hits as f64 / confidences.len() as f64).clamp(floor, 1.0)
}

/// Fraction of classes whose weight reaches `tau2`, clamped to `[floor, 1]`.
pub fn estimate_beta(w_s: ArrayView1<'_, f64>, tau2: f64, floor: f64) -> f64 {
    if w_s.is_empty() {
        return floor;
    }
    let hits = w_s.iter().filter(|&&w| w >= tau2).count();
    (hits as f64 / w_s.len() as f64).clamp(floor, 1.0)
}

/// `rate * new + (1 - rate) * old`.
pub fn ema_scalar(new_value: f64, old_value: f64, rate: f64) -> f64 {
    rate * new_value + (1.0 - rate) * old_value
}

/// Row caps for the prototype side of the transport: `min(1, alpha/beta) * r`.
///
/// Scaling the prototype measure by `alpha / beta` would push its total above
/// one whenever `alpha > beta`; clipping to the original masses keeps the
/// caps inside the simplex while the transported mass stays `alpha`.
pub fn source_row_caps(r: ArrayView1<'_, f64>, alpha: f64, beta: f64) -> Array1<f64> {
    let scale = (alpha / beta).min(1.0);
    r.mapv(|x| x * scale)
}

/// Running estimates of the common-class ratios on each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MassEstimates {
    pub alpha: f64,
    pub beta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub floor: f64,
}

impl Default for MassEstimates {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0, lambda1: 0.001, lambda2: 0.001, tau1: 0.9, tau2: 1.0, floor: 0.0 }
    }
}

impl MassEstimates {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau1 > 0.0 && self.tau1 <= 1.0) {
            return Err(Error::InvalidConfig(format!("tau1 {} outside (0, 1]", self.tau1)));
        }
        if !(self.tau2 > 0.0) {
            return Err(Error::InvalidConfig(format!("tau2 must be positive, got {}", self.tau2)));
        }
        for (name, rate) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::InvalidConfig(format!("{name} {rate} outside [0, 1)")));
            }
        }
        if !(0.0..=1.0).contains(&self.floor) {
            return Err(Error::InvalidConfig(format!("floor {} outside [0, 1]", self.floor)));
        }
        Ok(())
    }

    /// Replaces `alpha` outright, as done from full-data confidences.
    pub fn reset_alpha(&mut self, confidences: ArrayView1<'_, f64>) {
        self.alpha = estimate_alpha(confidences, self.tau1, self.floor);
    }

    /// EMA step of `alpha` toward the batch estimate; returns the new value.
    pub fn update_alpha(&mut self, confidences: ArrayView1<'_, f64>) -> f64 {
        let batch = estimate_alpha(confidences, self.tau1, self.floor);
        self.alpha = ema_scalar(batch, self.alpha, self.lambda1).clamp(self.floor, 1.0);
        self.alpha
    }

    /// EMA step of `beta` toward the estimate from class weights.
    pub fn update_beta(&mut self, w_s: ArrayView1<'_, f64>) -> f64 {
        let batch = estimate_beta(w_s, self.tau2, self.floor);
        self.beta = ema_scalar(batch, self.beta, self.lambda2).clamp(self.floor, 1.0);
        self.beta
    }
}
