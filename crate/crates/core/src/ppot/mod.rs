//! Prototype-based partial transport, its mini-batch average, and numerical
//! checks of the bounds relating them to sample-level partial transport.

mod bounds;
mod instance;
mod partition;
mod transport;

pub use bounds::{
    check_proposition1, lemma1_composite_plan, lemma2_explicit_plan, theorem1_check, BoundReport,
    PlanCheck, Proposition1Check, BOUND_TOLERANCE, FEASIBILITY_TOLERANCE,
};
pub use instance::{check_random_instances, random_instance, write_check_report, CheckRecord, RandomInstance};
pub use partition::{make_partition, Partition};
pub use transport::{mppot, pad_and_average_plans, ppot, PotSolver};
