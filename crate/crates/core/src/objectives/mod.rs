//! Plan-derived sample and class weights, the training losses, and running
//! estimates of the transported mass.

mod estimates;
mod losses;
mod weights;

pub use estimates::{alpha_floor, ema_scalar, estimate_alpha, estimate_beta, source_row_caps, MassEstimates};
pub use losses::{
    negative_entropy_loss, reweighted_ce_loss, reweighted_entropy_loss, total_loss, LossWeights,
    PROBABILITY_FLOOR,
};
pub use weights::{retained_count, source_class_weights, target_weights, unknown_weights, WeightVectors};
