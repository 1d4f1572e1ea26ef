//! Entropic partial transport converging to the exact optimum as the
//! regularisation shrinks.

use ppot::ot::{build_cost_matrix, pot_exact, pot_sinkhorn, SolverConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> ppot::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cloud = |n: usize, shift: f64| {
        ndarray::Array2::<f64>::from_shape_fn((n, 2), |_| shift + Distribution::<f64>::sample(&StandardNormal, &mut rng))
    };
    let (xs, xt) = (cloud(12, 0.0), cloud(10, 1.5));
    let cost = build_cost_matrix(xs.view(), xt.view())?;
    let a = ndarray::Array1::from_elem(12, 1.0 / 12.0);
    let b = ndarray::Array1::from_elem(10, 1.0 / 10.0);
    let s = 0.6;

    let exact = pot_exact(a.view(), b.view(), &cost, s)?;
    println!("exact partial cost   {:.6}", exact.objective());
    for epsilon in [1e-1, 1e-2, 1e-3] {
        let config = SolverConfig { max_iterations: 200_000, ..SolverConfig::with_epsilon(epsilon) };
        let plan = pot_sinkhorn(a.view(), b.view(), &cost, s, &config)?;
        let gap = (plan.objective() - exact.objective()) / exact.objective();
        println!(
            "epsilon {epsilon:<6} cost {:.6}  relative gap {gap:+.2e}  violation {:.1e}",
            plan.objective(),
            plan.partial_violation(a.view(), b.view(), s)
        );
    }
    Ok(())
}
