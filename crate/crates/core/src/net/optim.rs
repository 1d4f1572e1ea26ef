use serde::{Deserialize, Serialize};

use super::params::{Gradients, NetworkParams};
use crate::error::{Error, Result};

/// Nesterov SGD settings with the `(1 + gamma t)^-power` decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdConfig {
    pub base_lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub gamma: f64,
    pub power: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { base_lr: 0.01, momentum: 0.9, weight_decay: 5e-4, gamma: 10.0, power: 0.75 }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_lr > 0.0 && self.base_lr.is_finite()) {
            return Err(Error::InvalidConfig(format!("base_lr must be positive, got {}", self.base_lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        if !(self.weight_decay >= 0.0 && self.gamma >= 0.0 && self.power >= 0.0) {
            return Err(Error::InvalidConfig("weight_decay, gamma and power must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Momentum buffers and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: SgdConfig,
    pub velocity: NetworkParams,
    pub step: usize,
    pub total_steps: usize,
}

impl OptimizerState {
    pub fn new(params: &NetworkParams, config: SgdConfig, total_steps: usize) -> Self {
        Self { config, velocity: NetworkParams::zeros(params.architecture()), step: 0, total_steps: total_steps.max(1) }
    }

    /// Training progress in `[0, 1]`.
    pub fn progress(&self) -> f64 {
        (self.step as f64 / self.total_steps as f64).min(1.0)
    }

    pub fn learning_rate(&self) -> f64 {
        let c = &self.config;
        c.base_lr * (1.0 + c.gamma * self.progress()).powf(-c.power)
    }
}

/// One Nesterov step: `g += wd * x; v = mu v + g; x -= lr (g + mu v)`.
pub fn sgd_step(params: &mut NetworkParams, grads: &Gradients, state: &mut OptimizerState) {
    let lr = state.learning_rate();
    let (mu, wd) = (state.config.momentum, state.config.weight_decay);
    let grad_tensors = grads.tensors();
    for ((x, v), (_, g)) in params.tensors_mut().into_iter().zip(state.velocity.tensors_mut()).zip(grad_tensors) {
        for ((x, v), &g) in x.iter_mut().zip(v.iter_mut()).zip(g) {
            let g = g + wd * *x;
            *v = mu * *v + g;
            *x -= lr * (g + mu * *v);
        }
    }
    state.step += 1;
}
