mod support;

use ppot::net::{backward, batch_loss};
use support::{numerical_gradient, relative_errors, rng, GradCase};

#[test]
fn analytic_gradients_match_finite_differences() {
    let mut rng = rng(2024);
    let mut worst = 0.0_f64;
    for case_id in 0..40 {
        let case = GradCase::random(&mut rng, case_id % 2 == 1);
        let terms = case.terms();
        let (loss, analytic) = backward(&case.params, &terms).unwrap();
        assert_eq!(loss, batch_loss(&case.params, &terms).unwrap());
        let numeric = numerical_gradient(&case.params, &terms, 1e-5);
        for (name, err) in relative_errors(&analytic, &numeric) {
            worst = worst.max(err);
            assert!(err < 1e-4, "case {case_id} tensor {name}: relative error {err}");
        }
    }
    println!("worst relative error {worst:e}");
}
