//! Trains the prototype-transport model and the source-only baseline on the
//! same scenario and compares their open-set scores.
//!
//! `cargo run --release --example train_evaluate -- [seed]`

use ppot::experiment::{alignment_diagnostic, evaluate, train, ExperimentConfig};
use ppot::objectives::LossWeights;
use ppot::scenario::generate_scenario;

fn main() -> ppot::Result<()> {
    let seed = std::env::args().nth(1).map_or(Ok(0), |s| s.parse()).expect("seed must be an integer");
    let config = ExperimentConfig::default().with_seed(seed);
    let data = generate_scenario(&config.scenario)?;

    let baseline = ExperimentConfig { loss: LossWeights::source_only(), ..config.clone() };
    for (name, cfg) in [("source only", &baseline), ("prototype POT", &config)] {
        let outcome = train(cfg, &data)?;
        let report = evaluate(&outcome.checkpoint, &data, cfg.evaluation.xi)?;
        println!(
            "{name:>14}: H {:.3}  common {:.3}  unknown {:.3}  alpha {:.3} (true {:.3})",
            report.h_score, report.common_accuracy, report.private_accuracy, report.alpha, data.truth_alpha
        );
        if cfg.loss.eta1 > 0.0 {
            println!(
                "{:>14}  w^s common {:.3} vs private {:.3}; w^t known {:.3} vs unknown {:.3}",
                "", report.mean_ws_common, report.mean_ws_private, report.mean_wt_known, report.mean_wt_unknown
            );
            let diag = alignment_diagnostic(&outcome.initial_params, outcome.params(), &data, 25, seed, cfg.training.normalize_features)?;
            println!(
                "{:>14}  partial transport {:.3} -> {:.3}, common-class transport {:.3} -> {:.3}",
                "", diag.pot_pre, diag.pot_post, diag.ot_common_pre, diag.ot_common_post
            );
        }
    }
    Ok(())
}
