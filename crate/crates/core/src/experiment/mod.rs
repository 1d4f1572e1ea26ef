//! End-to-end runs on synthetic scenarios: training, evaluation, bound
//! checks and parameter sweeps, each writing CSV next to its artifacts.

mod config;
mod evaluate;
mod sweep;
mod theorems;
mod train;

use std::fs::File;
use std::path::Path;

use serde::Serialize;

pub use config::{EstimatorConfig, EvaluationConfig, ExperimentConfig, TrainingConfig, Variant};
pub use evaluate::{evaluate, h_score, mean_confidence, predict, EvalReport};
pub use sweep::{SweepGrid, SweepRow};
pub use theorems::{alignment_diagnostic, AlignmentDiagnostic};
pub use train::{architecture, confidences, train, TrainLogRow, TrainOutcome};

use crate::error::Result;
use crate::net::Checkpoint;
use crate::ppot::{check_random_instances, CheckRecord};
use crate::scenario::{generate_scenario, write_dataset_csv, ScenarioDataset};

/// Points per class used by the alignment diagnostic.
pub const ALIGNMENT_SAMPLES_PER_CLASS: usize = 25;

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = csv::Writer::from_writer(File::create(path)?);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Generates the configured scenario and writes `dataset.csv`.
pub fn cmd_gen_data(config: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioDataset> {
    std::fs::create_dir_all(out_dir)?;
    let data = generate_scenario(&config.scenario)?;
    write_dataset_csv(&data, File::create(out_dir.join("dataset.csv"))?)?;
    Ok(data)
}

/// Trains on the configured scenario; writes `checkpoint.txt`,
/// `train_log.csv` and the resolved `config.toml`.
pub fn cmd_train(config: &ExperimentConfig, out_dir: &Path) -> Result<TrainOutcome> {
    std::fs::create_dir_all(out_dir)?;
    let data = generate_scenario(&config.scenario)?;
    let outcome = train(config, &data)?;
    outcome.checkpoint.save(&out_dir.join("checkpoint.txt"))?;
    write_rows(&out_dir.join("train_log.csv"), &outcome.log)?;
    std::fs::write(out_dir.join("config.toml"), config.to_toml())?;
    Ok(outcome)
}

#[derive(Serialize)]
struct EvalRow<'a> {
    seed: u64,
    config_hash: &'a str,
    h_score: f64,
    common_accuracy: f64,
    private_accuracy: f64,
    overall_accuracy: f64,
    alpha: f64,
    beta: f64,
    mean_ws_common: f64,
    mean_ws_private: f64,
    mean_wt_known: f64,
    mean_wt_unknown: f64,
}

#[derive(Serialize)]
struct ClassRow<'a> {
    seed: u64,
    config_hash: &'a str,
    class: String,
    accuracy: f64,
    source_weight: Option<f64>,
}

/// Evaluates a checkpoint and writes `eval.csv` and `per_class.csv`.
pub fn cmd_evaluate(
    checkpoint: &Checkpoint,
    data: &ScenarioDataset,
    xi: f64,
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<EvalReport> {
    std::fs::create_dir_all(out_dir)?;
    let report = evaluate(checkpoint, data, xi)?;
    let hash = config.hash();
    write_rows(
        &out_dir.join("eval.csv"),
        &[EvalRow {
            seed: config.seed,
            config_hash: &hash,
            h_score: report.h_score,
            common_accuracy: report.common_accuracy,
            private_accuracy: report.private_accuracy,
            overall_accuracy: report.overall_accuracy,
            alpha: report.alpha,
            beta: report.beta,
            mean_ws_common: report.mean_ws_common,
            mean_ws_private: report.mean_ws_private,
            mean_wt_known: report.mean_wt_known,
            mean_wt_unknown: report.mean_wt_unknown,
        }],
    )?;
    let classes = data.source_classes;
    let rows: Vec<ClassRow<'_>> = report
        .per_class_accuracy
        .iter()
        .enumerate()
        .map(|(k, &accuracy)| ClassRow {
            seed: config.seed,
            config_hash: &hash,
            class: if k == classes { "unknown".into() } else { k.to_string() },
            accuracy,
            source_weight: report.class_weights.get(k).copied(),
        })
        .collect();
    write_rows(&out_dir.join("per_class.csv"), &rows)?;
    Ok(report)
}

/// Outcome of the bound checks and the alignment diagnostic.
#[derive(Debug, Clone)]
pub struct TheoremSummary {
    pub records: Vec<CheckRecord>,
    pub failures: usize,
    pub alignment: Option<AlignmentDiagnostic>,
}

#[derive(Serialize)]
struct AlignmentRow<'a> {
    seed: u64,
    config_hash: &'a str,
    alpha: f64,
    source_samples: usize,
    target_samples: usize,
    pot_pre: f64,
    pot_post: f64,
    ot_common_pre: f64,
    ot_common_post: f64,
}

impl<'a> AlignmentRow<'a> {
    fn new(seed: u64, config_hash: &'a str, d: &AlignmentDiagnostic) -> Self {
        Self {
            seed,
            config_hash,
            alpha: d.alpha,
            source_samples: d.source_samples,
            target_samples: d.target_samples,
            pot_pre: d.pot_pre,
            pot_post: d.pot_post,
            ot_common_pre: d.ot_common_pre,
            ot_common_post: d.ot_common_post,
        }
    }
}

/// Checks the bounds on `instances` random problems (`checks.csv`) and,
/// unless `skip_training`, trains on the configured scenario and compares
/// sample-level transport before and after (`alignment.csv`).
pub fn cmd_check_theorems(
    config: &ExperimentConfig,
    instances: usize,
    skip_training: bool,
    out_dir: &Path,
) -> Result<TheoremSummary> {
    std::fs::create_dir_all(out_dir)?;
    let records = check_random_instances(config.seed, instances)?;
    let failures = records.iter().filter(|r| !r.holds).count();
    let mut out = csv::Writer::from_writer(File::create(out_dir.join("checks.csv"))?);
    out.write_record(["config_hash", "seed", "instance", "check", "classes", "targets", "batch_size", "mass", "lhs", "rhs", "slack", "holds"])?;
    let hash = config.hash();
    for r in &records {
        out.write_record([
            hash.clone(),
            r.seed.to_string(),
            r.instance.to_string(),
            r.check.to_owned(),
            r.classes.to_string(),
            r.targets.to_string(),
            r.batch_size.to_string(),
            r.mass.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.slack.to_string(),
            r.holds.to_string(),
        ])?;
    }
    out.flush()?;

    let alignment = if skip_training {
        None
    } else {
        let data = generate_scenario(&config.scenario)?;
        let outcome = train(config, &data)?;
        let diag = alignment_diagnostic(&outcome.initial_params, outcome.params(), &data, ALIGNMENT_SAMPLES_PER_CLASS, config.seed, config.training.normalize_features)?;
        let mut out = csv::Writer::from_writer(File::create(out_dir.join("alignment.csv"))?);
        out.serialize(AlignmentRow::new(config.seed, &hash, &diag))?;
        out.flush()?;
        Some(diag)
    };
    Ok(TheoremSummary { records, failures, alignment })
}

/// Trains and evaluates every grid point; writes `sweep.csv`.
pub fn cmd_sweep(config: &ExperimentConfig, grid: &SweepGrid, out_dir: &Path) -> Result<Vec<SweepRow>> {
    std::fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    for point in grid.points() {
        let cfg = SweepGrid::apply(config, &point)?;
        let data = generate_scenario(&cfg.scenario)?;
        let outcome = train(&cfg, &data)?;
        let report = evaluate(&outcome.checkpoint, &data, cfg.evaluation.xi)?;
        rows.push(SweepRow {
            seed: cfg.seed,
            config_hash: cfg.hash(),
            point: point.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";"),
            variant: cfg.variant.to_string(),
            h_score: report.h_score,
            common_accuracy: report.common_accuracy,
            private_accuracy: report.private_accuracy,
            overall_accuracy: report.overall_accuracy,
            alpha: report.alpha,
            beta: report.beta,
        });
    }
    write_rows(&out_dir.join("sweep.csv"), &rows)?;
    Ok(rows)
}
