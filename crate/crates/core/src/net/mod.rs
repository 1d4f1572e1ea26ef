//! A small tanh network with hand-written gradients, Nesterov SGD and a
//! class-balanced batch sampler.

mod backward;
mod checkpoint;
mod optim;
mod params;
mod sampler;

pub use backward::{backward, batch_loss, unit_rows, Alignment, BatchTerms, LossBreakdown};
pub use checkpoint::Checkpoint;
pub use optim::{sgd_step, OptimizerState, SgdConfig};
pub use params::{softmax, Architecture, Forward, Gradients, NetworkParams};
pub use sampler::{class_balanced_batches, ClassBalancedSampler};
