use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::partition::Partition;
use super::transport::{mppot, pad_and_average_plans, ppot, PotSolver};
use crate::error::{Error, Result};
use crate::ot::{build_cost_matrix, euclidean, frobenius, pot_exact, TransportPlan};
use crate::prototypes::PrototypeSet;

/// Slack allowed on every cost inequality.
pub const BOUND_TOLERANCE: f64 = 1e-7;
/// Slack allowed on marginal constraints of constructed plans.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Outcome of comparing full-data PPOT against its mini-batch average.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposition1Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Constraint violation of the averaged padded plan in the full polytope.
    pub padded_violation: f64,
}

impl Proposition1Check {
    pub fn feasible(&self) -> bool {
        self.padded_violation <= FEASIBILITY_TOLERANCE
    }
}

/// `PPOT^s <= m-PPOT^s`, evaluated with exact solvers.
pub fn check_proposition1(
    bank: &PrototypeSet,
    targets: ArrayView2<'_, f64>,
    s: f64,
    partition: &Partition,
) -> Result<Proposition1Check> {
    let n = targets.nrows();
    let (lhs, _) = ppot(bank, targets, s, &PotSolver::Exact)?;
    let (rhs, plans) = mppot(bank, targets, partition, s, &PotSolver::Exact)?;
    let padded = pad_and_average_plans(&plans, partition, n)?;
    let caps = Array1::from_elem(n, 1.0 / n as f64);
    let padded_violation = padded.partial_violation(bank.class_mass(), caps.view(), s);
    Ok(Proposition1Check { lhs, rhs, holds: lhs <= rhs + BOUND_TOLERANCE, padded_violation })
}

/// Composes a source-to-prototype plan with a prototype-to-target plan
/// through the prototype weights: `S = plan_pc * diag(1/w) * plan_cq`.
///
/// Prototypes with zero weight are skipped; they must carry no mass in
/// either factor.
pub fn lemma1_composite_plan(
    plan_pc: &TransportPlan,
    plan_cq: &TransportPlan,
    w: ArrayView1<'_, f64>,
) -> Result<TransportPlan> {
    let l = w.len();
    if plan_pc.cols() != l || plan_cq.rows() != l {
        return Err(Error::Shape(format!(
            "plans are {}x{} and {}x{} but w has {l} entries",
            plan_pc.rows(),
            plan_pc.cols(),
            plan_cq.rows(),
            plan_cq.cols()
        )));
    }
    let (pc, cq) = (plan_pc.entries(), plan_cq.entries());
    let mut inv = Array1::zeros(l);
    for k in 0..l {
        if w[k] > 0.0 {
            inv[k] = 1.0 / w[k];
        } else if w[k] < 0.0 {
            return Err(Error::InvalidArgument(format!("negative weight {} at {k}", w[k])));
        } else if pc.column(k).sum() > 0.0 || cq.row(k).sum() > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "prototype {k} has zero weight but carries mass"
            )));
        }
    }
    let scaled = &pc * &inv.view().insert_axis(ndarray::Axis(0));
    let entries = scaled.dot(&cq);
    let mass = entries.sum();
    Ok(TransportPlan::with_objective(entries, mass, f64::NAN))
}

/// The `m x L` plan sending source sample `i` to its own prototype with
/// mass `(w_y / r_y) p_i`.
pub fn lemma2_explicit_plan(
    labels: &[usize],
    p: ArrayView1<'_, f64>,
    r: ArrayView1<'_, f64>,
    w: ArrayView1<'_, f64>,
) -> Result<Array2<f64>> {
    if labels.len() != p.len() || r.len() != w.len() {
        return Err(Error::Shape("labels/p or r/w lengths differ".into()));
    }
    let mut plan = Array2::zeros((p.len(), r.len()));
    for (i, &y) in labels.iter().enumerate() {
        if y >= r.len() {
            return Err(Error::LabelOutOfRange { label: y, classes: r.len() });
        }
        if r[y] <= 0.0 {
            return Err(Error::InvalidArgument(format!("class {y} has zero mass")));
        }
        plan[[i, y]] = w[y] / r[y] * p[i];
    }
    Ok(plan)
}

/// A constructed plan's cost together with the values it must sit between.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanCheck {
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
    pub violation: f64,
}

impl PlanCheck {
    pub fn holds(&self) -> bool {
        self.violation <= FEASIBILITY_TOLERANCE
            && self.lower <= self.cost + BOUND_TOLERANCE
            && self.cost <= self.upper + BOUND_TOLERANCE
    }
}

/// Terms of the bound `POT^s(p, q) <= sum_i (w_y/r_y) p_i d_i + m-PPOT^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub pot_value: f64,
    pub ppot_value: f64,
    pub mppot_value: f64,
    pub prototype_distance_term: f64,
    pub bound_satisfied: bool,
    /// `bound - pot_value`.
    pub slack: f64,
    /// Composite plan: cost within `[POT(p,q), POT(p,c_w) + PPOT]`.
    pub composite: PlanCheck,
    /// Explicit plan: cost within `[POT(p,c_w), prototype_distance_term]`.
    pub explicit: PlanCheck,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.bound_satisfied && self.composite.holds() && self.explicit.holds()
    }
}

/// Evaluates every side of the prototype bound with exact solvers, `p`
/// uniform over the source samples and `q` uniform over the targets.
pub fn theorem1_check(
    source: ArrayView2<'_, f64>,
    labels: &[usize],
    bank: &PrototypeSet,
    targets: ArrayView2<'_, f64>,
    s: f64,
    partition: &Partition,
) -> Result<BoundReport> {
    let (m, n) = (source.nrows(), targets.nrows());
    if labels.len() != m {
        return Err(Error::Shape(format!("{m} source rows but {} labels", labels.len())));
    }
    if m == 0 || n == 0 {
        return Err(Error::EmptyMeasure);
    }
    let p = Array1::from_elem(m, 1.0 / m as f64);
    let q = Array1::from_elem(n, 1.0 / n as f64);
    let r = bank.class_mass();

    let (ppot_value, plan_cq) = ppot(bank, targets, s, &PotSolver::Exact)?;
    let (mppot_value, _) = mppot(bank, targets, partition, s, &PotSolver::Exact)?;
    let w = plan_cq.row_sums();

    let explicit = lemma2_explicit_plan(labels, p.view(), r, w.view())?;
    let d: Vec<f64> = source
        .outer_iter()
        .zip(labels)
        .map(|(x, &y)| {
            euclidean(x.as_slice().expect("standard layout"), bank.prototypes().row(y).as_slice().unwrap())
        })
        .collect();
    let prototype_distance_term: f64 =
        labels.iter().enumerate().map(|(i, &y)| w[y] / r[y] * p[i] * d[i]).sum();

    let c_pq = build_cost_matrix(source, targets)?;
    let pot_value = pot_exact(p.view(), q.view(), &c_pq, s)?.objective();

    let c_pc = build_cost_matrix(source, bank.prototypes())?;
    let plan_pc = pot_exact(p.view(), w.view(), &c_pc, w.sum())?;
    let pot_pc = plan_pc.objective();

    let explicit_plan = TransportPlan::with_objective(explicit, s, f64::NAN);
    let explicit_check = PlanCheck {
        cost: frobenius(explicit_plan.entries(), c_pc.entries()),
        lower: pot_pc,
        upper: prototype_distance_term,
        violation: column_equality_violation(&explicit_plan, p.view(), w.view(), s),
    };

    let composite = lemma1_composite_plan(&plan_pc, &plan_cq, w.view())?;
    let composite_check = PlanCheck {
        cost: frobenius(composite.entries(), c_pq.entries()),
        lower: pot_value,
        upper: pot_pc + ppot_value,
        violation: composite.partial_violation(p.view(), q.view(), s),
    };

    let bound = prototype_distance_term + mppot_value;
    let slack = bound - pot_value;
    Ok(BoundReport {
        pot_value,
        ppot_value,
        mppot_value,
        prototype_distance_term,
        bound_satisfied: slack >= -BOUND_TOLERANCE,
        slack,
        composite: composite_check,
        explicit: explicit_check,
    })
}

/// Violation of `rows <= p`, `cols == w`, `sum == s`.
fn column_equality_violation(
    plan: &TransportPlan,
    p: ArrayView1<'_, f64>,
    w: ArrayView1<'_, f64>,
    s: f64,
) -> f64 {
    let caps = plan.partial_violation(p, w, s);
    let cols = plan
        .col_sums()
        .iter()
        .zip(w)
        .fold(0.0_f64, |acc, (c, w)| acc.max((c - w).abs()));
    caps.max(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppot::make_partition;
    use crate::prototypes::compute_prototypes;
    use ndarray::array;

    #[test]
    fn single_prototype_composite_is_rank_one() {
        let pc = TransportPlan::with_objective(array![[0.1], [0.3]], 0.4, 0.0);
        let cq = TransportPlan::with_objective(array![[0.25, 0.15]], 0.4, 0.0);
        let s = lemma1_composite_plan(&pc, &cq, array![0.4].view()).unwrap();
        let expected = array![[0.1 * 0.25, 0.1 * 0.15], [0.3 * 0.25, 0.3 * 0.15]] / 0.4;
        for (a, b) in s.entries().iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn permutation_composition() {
        let pc = TransportPlan::with_objective(array![[0.0, 0.5], [0.5, 0.0]], 1.0, 0.0);
        let cq = TransportPlan::with_objective(array![[0.0, 0.5], [0.5, 0.0]], 1.0, 0.0);
        let s = lemma1_composite_plan(&pc, &cq, array![0.5, 0.5].view()).unwrap();
        assert_eq!(s.entries(), array![[0.5, 0.0], [0.0, 0.5]]);
    }

    #[test]
    fn zero_weight_rows_are_skipped_or_rejected() {
        let pc = TransportPlan::with_objective(array![[0.2, 0.0]], 0.2, 0.0);
        let cq = TransportPlan::with_objective(array![[0.2], [0.0]], 0.2, 0.0);
        let s = lemma1_composite_plan(&pc, &cq, array![0.2, 0.0].view()).unwrap();
        assert!((s.entries()[[0, 0]] - 0.2).abs() < 1e-15);
        let bad = TransportPlan::with_objective(array![[0.1, 0.1]], 0.2, 0.0);
        assert!(lemma1_composite_plan(&bad, &cq, array![0.2, 0.0].view()).is_err());
    }

    #[test]
    fn zero_spread_sources_reduce_to_minibatch_bound() {
        let source = array![[0.0, 0.0], [0.0, 0.0], [2.0, 1.0], [2.0, 1.0]];
        let labels = [0, 0, 1, 1];
        let bank = compute_prototypes(source.view(), &labels, 2).unwrap();
        let targets = array![[0.2, 0.1], [1.8, 0.9], [5.0, 5.0], [-1.0, 0.5]];
        let part = make_partition(4, 2, 3).unwrap();
        let report = theorem1_check(source.view(), &labels, &bank, targets.view(), 0.5, &part).unwrap();
        assert_eq!(report.prototype_distance_term, 0.0);
        assert!(report.pot_value <= report.mppot_value + BOUND_TOLERANCE);
        assert!(report.all_hold());
    }

    #[test]
    fn single_batch_proposition_is_tight() {
        let bank = compute_prototypes(array![[0.0], [1.0], [4.0]].view(), &[0, 1, 2], 3).unwrap();
        let targets = array![[0.3], [2.2], [3.1]];
        let check = check_proposition1(&bank, targets.view(), 0.8, &Partition::single(3).unwrap()).unwrap();
        assert_eq!(check.lhs, check.rhs);
        assert!(check.holds && check.feasible());
    }
}
