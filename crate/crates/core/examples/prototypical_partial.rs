//! Partial transport from class prototypes to target samples, on the full
//! target set and averaged over mini-batches.

use ndarray::Axis;
use ppot::ot::{build_cost_matrix, SolverConfig};
use ppot::ppot::{check_proposition1, make_partition, mppot, pad_and_average_plans, ppot, PotSolver};
use ppot::prototypes::compute_prototypes;
use ppot::scenario::{generate_scenario, ScenarioConfig};

fn main() -> ppot::Result<()> {
    let data = generate_scenario(&ScenarioConfig { samples_per_class: 24, ..ScenarioConfig::default() })?;
    let bank = compute_prototypes(data.source_x.view(), &data.source_y, data.source_classes)?;
    let n = data.target_x.nrows();
    let s = data.truth_alpha;
    println!("{} prototypes, {n} targets, transported mass {s:.3}", bank.num_classes());

    let (full, plan) = ppot(&bank, data.target_x.view(), s, &PotSolver::Exact)?;
    println!("PPOT (exact) {full:.4}");
    let received = plan.col_sums();
    for (name, known) in [("known", true), ("unknown", false)] {
        let idx: Vec<usize> = (0..n).filter(|&i| data.target_known[i] == known).collect();
        let mean = received.select(Axis(0), &idx).sum() * n as f64 / (s * idx.len() as f64);
        println!("  mean target weight over {name} samples: {mean:.3}");
    }

    let partition = make_partition(n, 12, 3)?;
    let (batched, plans) = mppot(&bank, data.target_x.view(), &partition, s, &PotSolver::Exact)?;
    let averaged = pad_and_average_plans(&plans, &partition, n)?;
    println!("m-PPOT over {} batches {batched:.4}; averaged plan mass {:.4}", partition.num_batches(), averaged.mass());

    // Entropic smoothing only means something relative to the cost scale.
    let scale = build_cost_matrix(bank.prototypes(), data.target_x.view())?.entries().fold(0.0_f64, |m, &c| m.max(c));
    let epsilon = 0.05 * scale;
    let entropic = PotSolver::Entropic(SolverConfig::with_epsilon(epsilon));
    let (smooth, _) = mppot(&bank, data.target_x.view(), &partition, s, &entropic)?;
    println!("m-PPOT (entropic, epsilon {epsilon:.3} = 5% of max cost) {smooth:.4}");

    let check = check_proposition1(&bank, data.target_x.view(), s, &partition)?;
    println!("full {:.4} <= batched {:.4}: {}, averaged plan feasible: {}", check.lhs, check.rhs, check.holds, check.feasible());
    Ok(())
}
