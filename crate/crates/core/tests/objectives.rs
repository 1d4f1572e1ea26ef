use ndarray::{Array1, Array2};
use ppot::objectives::{
    estimate_alpha, estimate_beta, retained_count, source_class_weights, source_row_caps, target_weights,
    unknown_weights, WeightVectors,
};
use ppot::ot::TransportPlan;
use proptest::prelude::*;

fn plan_strategy() -> impl Strategy<Value = (Array2<f64>, f64)> {
    (1usize..7, 1usize..13, 0.05f64..1.0).prop_flat_map(|(l, b, alpha)| {
        prop::collection::vec(0.0f64..1.0, l * b).prop_map(move |raw| {
            let mut plan = Array2::from_shape_vec((l, b), raw).unwrap();
            plan[[0, 0]] += 1e-3;
            let total = plan.sum();
            plan *= alpha / total;
            (plan, alpha)
        })
    })
}

proptest! {
    #[test]
    fn weight_sums_match_batch_and_class_counts((entries, alpha) in plan_strategy()) {
        let (l, b) = entries.dim();
        let plan = TransportPlan::with_objective(entries, alpha, 0.0);
        let w_t = target_weights(&plan, alpha, b).unwrap();
        let w_s = source_class_weights(&plan, alpha, l).unwrap();
        prop_assert!((w_t.sum() - b as f64).abs() < 1e-9);
        prop_assert!((w_s.sum() - l as f64).abs() < 1e-9);
    }

    #[test]
    fn unknown_weights_keep_the_lowest_known_weights((entries, alpha) in plan_strategy(), keep in 0.05f64..1.0) {
        let b = entries.ncols();
        let plan = TransportPlan::with_objective(entries, alpha, 0.0);
        let w = WeightVectors::from_plan(&plan, alpha, keep).unwrap();
        let kept: Vec<usize> = (0..b).filter(|&i| w.target_unknown[i] > 0.0).collect();
        let positive = w.target_known.iter().filter(|&&t| t < 1.0).count();
        prop_assert_eq!(kept.len(), retained_count(b, keep).min(positive));
        for &i in &kept {
            prop_assert!((w.target_unknown[i] - (1.0 - w.target_known[i])).abs() < 1e-12);
            for j in (0..b).filter(|j| !kept.contains(j)) {
                prop_assert!(w.target_known[i] <= w.target_known[j]);
            }
        }
    }

    #[test]
    fn alpha_estimate_falls_as_threshold_rises(conf in prop::collection::vec(0.0f64..=1.0, 1..40), t1 in 0.01f64..=1.0, t2 in 0.01f64..=1.0) {
        let conf = Array1::from(conf);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let floor = 0.05;
        let a_lo = estimate_alpha(conf.view(), lo, floor);
        let a_hi = estimate_alpha(conf.view(), hi, floor);
        prop_assert!(a_hi <= a_lo);
        prop_assert!((floor..=1.0).contains(&a_hi));
    }

    #[test]
    fn beta_estimate_falls_as_threshold_rises(w in prop::collection::vec(0.0f64..3.0, 1..12), t1 in 0.01f64..3.0, t2 in 0.01f64..3.0) {
        let w = Array1::from(w);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(estimate_beta(w.view(), hi, 0.1) <= estimate_beta(w.view(), lo, 0.1));
    }

    #[test]
    fn row_caps_never_exceed_class_mass(r in prop::collection::vec(0.0f64..1.0, 1..10), alpha in 0.01f64..=1.0, beta in 0.01f64..=1.0) {
        let r = Array1::from(r);
        let caps = source_row_caps(r.view(), alpha, beta);
        for (c, x) in caps.iter().zip(r.iter()) {
            prop_assert!(*c <= *x + 1e-15);
        }
        prop_assert!(caps.sum() + 1e-12 >= alpha.min(beta) / beta * r.sum());
    }
}

#[test]
fn uniform_plan_gives_unit_weights() {
    let (l, b, alpha) = (3, 8, 0.6);
    let plan = TransportPlan::with_objective(Array2::from_elem((l, b), alpha / (l * b) as f64), alpha, 0.0);
    let w = WeightVectors::from_plan(&plan, alpha, 0.25).unwrap();
    assert!(w.target_known.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    assert!(w.source_class.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    assert!(w.target_unknown.iter().all(|&x| x == 0.0));
    let _ = unknown_weights(w.target_known.view(), 0.25).unwrap();
}
