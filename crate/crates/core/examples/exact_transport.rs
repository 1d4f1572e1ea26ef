//! Balanced and partial transport between two small point clouds with the
//! exact min-cost-flow solver.

use ndarray::array;
use ppot::ot::{build_cost_matrix, solve_exact_ot, solve_exact_pot, DiscreteMeasure};

fn main() -> ppot::Result<()> {
    let source = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let target = array![[0.1, 0.0], [1.0, 0.2], [5.0, 5.0]];
    let cost = build_cost_matrix(source.view(), target.view())?;
    let mu = DiscreteMeasure::uniform(source)?;
    let nu = DiscreteMeasure::uniform(target)?;

    let full = solve_exact_ot(&mu, &nu, &cost)?;
    println!("balanced OT cost {:.4}", full.objective());
    println!("{:.3}", full.entries());

    // The outlier at (5, 5) is left untouched once only two thirds of the
    // mass has to move.
    for s in [1.0 / 3.0, 2.0 / 3.0, 1.0] {
        let plan = solve_exact_pot(&mu, &nu, &cost, s)?;
        println!("partial s = {s:.3}: cost {:.4}, target mass received {:.3}", plan.objective(), plan.col_sums());
    }
    Ok(())
}
