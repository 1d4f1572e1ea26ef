mod support;

use ndarray::{array, Array2};
use ppot::ot::{build_cost_matrix, pot_exact, pot_sinkhorn, CostMatrix, SolverConfig};
use proptest::prelude::*;
use rand::Rng;
use support::{rational_masses, random_points, rng, to_array, vertex_enumeration_pot};

#[test]
fn oracle_agrees_on_hand_instances() {
    let c = array![[0.0, 10.0], [10.0, 1.0]];
    assert_eq!(vertex_enumeration_pot(&[0.5, 0.5], &[0.5, 0.5], &c, 0.5), 0.0);
    let c = array![[1.0, 2.0], [3.0, 1.0]];
    assert!((vertex_enumeration_pot(&[0.5, 0.5], &[0.5, 0.5], &c, 1.0) - 1.0).abs() < 1e-12);
    let c = array![[2.0, 4.0]];
    assert!((vertex_enumeration_pot(&[1.0], &[0.3, 0.7], &c, 1.0) - 3.4).abs() < 1e-12);
}

#[test]
fn exact_partial_matches_vertex_enumeration() {
    let mut r = rng(11);
    for _ in 0..40 {
        let m = r.gen_range(1..=3);
        let n = r.gen_range(1..=3);
        let a = rational_masses(&mut r, m);
        let b = rational_masses(&mut r, n);
        let cost = Array2::from_shape_fn((m, n), |_| r.gen_range(0..10) as f64 / 4.0);
        let s = r.gen_range(1..=10) as f64 / 10.0;
        let oracle = vertex_enumeration_pot(&a, &b, &cost, s);
        let plan = pot_exact(to_array(&a).view(), to_array(&b).view(), &CostMatrix::new(cost).unwrap(), s)
            .unwrap();
        assert!((plan.objective() - oracle).abs() < 1e-9, "{} vs {}", plan.objective(), oracle);
    }
}

#[test]
fn sinkhorn_gap_shrinks_with_epsilon() {
    let mut r = rng(5);
    for _ in 0..5 {
        let src = random_points(&mut r, 6, 2);
        let tgt = random_points(&mut r, 5, 2);
        let cost = build_cost_matrix(src.view(), tgt.view()).unwrap();
        let a = to_array(&vec![1.0 / 6.0; 6]);
        let b = to_array(&vec![0.2; 5]);
        let s = 0.6;
        let exact = pot_exact(a.view(), b.view(), &cost, s).unwrap().objective();
        let mut last_gap = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3] {
            let cfg = SolverConfig { max_iterations: 200_000, ..SolverConfig::with_epsilon(eps) };
            let ent = pot_sinkhorn(a.view(), b.view(), &cost, s, &cfg).unwrap().objective();
            let gap = ent - exact;
            assert!(gap >= -1e-8, "entropic objective below exact: {gap}");
            assert!(gap <= last_gap + 1e-8, "gap grew from {last_gap} to {gap} at eps {eps}");
            last_gap = gap;
        }
    }
}

#[test]
fn sinkhorn_random_ten_by_seven() {
    let mut r = rng(21);
    let src = random_points(&mut r, 10, 3);
    let tgt = random_points(&mut r, 7, 3);
    let cost = build_cost_matrix(src.view(), tgt.view()).unwrap();
    let a = to_array(&vec![0.1; 10]);
    let b = to_array(&vec![1.0 / 7.0; 7]);
    let exact = pot_exact(a.view(), b.view(), &cost, 0.4).unwrap();
    let cfg = SolverConfig { max_iterations: 100_000, ..SolverConfig::default() };
    let ent = pot_sinkhorn(a.view(), b.view(), &cost, 0.4, &cfg).unwrap();
    assert!(ent.objective() >= exact.objective() - 1e-9);
    assert!(ent.partial_violation(a.view(), b.view(), 0.4) < 1e-9);
}

#[test]
fn deterministic_plans() {
    let mut r = rng(8);
    let src = random_points(&mut r, 7, 2);
    let tgt = random_points(&mut r, 9, 2);
    let cost = build_cost_matrix(src.view(), tgt.view()).unwrap();
    let a = to_array(&vec![1.0 / 7.0; 7]);
    let b = to_array(&vec![1.0 / 9.0; 9]);
    let p1 = pot_exact(a.view(), b.view(), &cost, 0.5).unwrap();
    let p2 = pot_exact(a.view(), b.view(), &cost, 0.5).unwrap();
    assert_eq!(p1, p2);
    let cfg = SolverConfig::default();
    let e1 = pot_sinkhorn(a.view(), b.view(), &cost, 0.5, &cfg).unwrap();
    let e2 = pot_sinkhorn(a.view(), b.view(), &cost, 0.5, &cfg).unwrap();
    assert_eq!(e1, e2);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, .. ProptestConfig::default() })]

    #[test]
    fn partial_objective_is_monotone_in_mass(seed in 0u64..10_000, m in 1usize..6, n in 1usize..6) {
        let mut r = rng(seed);
        let a = to_array(&rational_masses(&mut r, m));
        let b = to_array(&rational_masses(&mut r, n));
        let cost = CostMatrix::new(Array2::from_shape_fn((m, n), |_| r.gen_range(0.0..3.0))).unwrap();
        let mut prev = 0.0;
        for step in 0..=10 {
            let s = step as f64 / 10.0;
            let plan = pot_exact(a.view(), b.view(), &cost, s).unwrap();
            prop_assert!(plan.partial_violation(a.view(), b.view(), s) < 1e-9);
            prop_assert!(plan.objective() >= prev - 1e-12);
            prev = plan.objective();
        }
    }

    #[test]
    fn exact_partial_matches_oracle_small(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let m = r.gen_range(1..=3);
        let n = r.gen_range(1..=3);
        let a = rational_masses(&mut r, m);
        let b = rational_masses(&mut r, n);
        let cost = Array2::from_shape_fn((m, n), |_| r.gen_range(0.0..2.0));
        let s = r.gen_range(0.0..1.0);
        let oracle = vertex_enumeration_pot(&a, &b, &cost, s);
        let plan = pot_exact(to_array(&a).view(), to_array(&b).view(), &CostMatrix::new(cost).unwrap(), s).unwrap();
        prop_assert!((plan.objective() - oracle).abs() < 1e-9);
    }
}
