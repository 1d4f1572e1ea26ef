//! Discrete optimal transport: measures, costs, plans and solvers.

mod cost;
mod exact;
mod measure;
mod minibatch;
mod plan;
mod sinkhorn;

pub use cost::{build_cost_matrix, euclidean, CostMatrix};
pub use exact::{ot_exact, pot_exact, solve_exact_ot, solve_exact_pot, MASS_TOLERANCE};
pub use measure::DiscreteMeasure;
pub use minibatch::minibatch_ot;
pub use plan::{frobenius, TransportPlan};
pub use sinkhorn::{pot_sinkhorn, sinkhorn_pot, KernelDomain, SolverConfig};
