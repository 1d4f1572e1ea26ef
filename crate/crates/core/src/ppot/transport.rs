use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::partition::Partition;
use crate::error::{Error, Result};
use crate::ot::{build_cost_matrix, pot_exact, pot_sinkhorn, CostMatrix, SolverConfig, TransportPlan};
use crate::prototypes::PrototypeSet;

/// Which partial transport solver backs a computation.
#[derive(Debug, Clone, PartialEq)]
pub enum PotSolver {
    /// Exact linear programming; used wherever inequalities are checked.
    Exact,
    /// Entropic Dykstra iterations; used during training.
    Entropic(SolverConfig),
}

impl PotSolver {
    /// Solves partial transport of mass `s` with row caps `a` and column caps `b`.
    pub fn solve(
        &self,
        a: ArrayView1<'_, f64>,
        b: ArrayView1<'_, f64>,
        cost: &CostMatrix,
        s: f64,
    ) -> Result<TransportPlan> {
        match self {
            PotSolver::Exact => pot_exact(a, b, cost, s),
            PotSolver::Entropic(cfg) => pot_sinkhorn(a, b, cost, s, cfg),
        }
    }
}

fn uniform(n: usize) -> Array1<f64> {
    Array1::from_elem(n, 1.0 / n as f64)
}

/// Partial transport of mass `s` from the prototype measure to the uniform
/// measure on `targets`. Returns the transport cost and the `L x n` plan.
pub fn ppot(
    bank: &PrototypeSet,
    targets: ArrayView2<'_, f64>,
    s: f64,
    solver: &PotSolver,
) -> Result<(f64, TransportPlan)> {
    if targets.nrows() == 0 {
        return Err(Error::EmptyMeasure);
    }
    let cost = build_cost_matrix(bank.prototypes(), targets)?;
    let plan = solver.solve(bank.class_mass(), uniform(targets.nrows()).view(), &cost, s)?;
    Ok((plan.objective(), plan))
}

/// Mean of per-batch PPOT costs over `partition`, each batch carrying a
/// uniform measure of total mass one. Plans are returned in batch order.
pub fn mppot(
    bank: &PrototypeSet,
    targets: ArrayView2<'_, f64>,
    partition: &Partition,
    s: f64,
    solver: &PotSolver,
) -> Result<(f64, Vec<TransportPlan>)> {
    if partition.len() != targets.nrows() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} indices but there are {} targets",
            partition.len(),
            targets.nrows()
        )));
    }
    let mut total = 0.0;
    let mut plans = Vec::with_capacity(partition.num_batches());
    for batch in partition.batches() {
        let (cost, plan) = ppot(bank, targets.select(Axis(0), batch).view(), s, solver)?;
        total += cost;
        plans.push(plan);
    }
    Ok((total / partition.num_batches() as f64, plans))
}

/// Embeds each batch plan into the columns of its batch and averages.
pub fn pad_and_average_plans(
    plans: &[TransportPlan],
    partition: &Partition,
    n: usize,
) -> Result<TransportPlan> {
    if plans.len() != partition.num_batches() || partition.len() != n {
        return Err(Error::Shape(format!(
            "{} plans for {} batches over {n} targets",
            plans.len(),
            partition.num_batches()
        )));
    }
    let rows = plans.first().map_or(0, TransportPlan::rows);
    let k = plans.len() as f64;
    let mut padded = Array2::zeros((rows, n));
    let mut mass = 0.0;
    let mut objective = 0.0;
    for (plan, batch) in plans.iter().zip(partition.batches()) {
        if plan.rows() != rows || plan.cols() != batch.len() {
            return Err(Error::Shape(format!(
                "batch plan is {}x{}, expected {rows}x{}",
                plan.rows(),
                plan.cols(),
                batch.len()
            )));
        }
        for (local, &j) in batch.iter().enumerate() {
            let mut col = padded.column_mut(j);
            col.scaled_add(1.0 / k, &plan.entries().column(local));
        }
        mass += plan.total_mass() / k;
        objective += plan.objective() / k;
    }
    Ok(TransportPlan::with_objective(padded, mass, objective))
}
