use ppot::experiment::{evaluate, train, ExperimentConfig, SweepGrid, Variant};
use ppot::net::Checkpoint;
use ppot::objectives::retained_count;
use ppot::scenario::generate_scenario;
use std::process::Command;

fn short(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default().with_seed(seed);
    cfg.scenario.samples_per_class = 30;
    cfg.training.epochs = 3;
    cfg.training.iters_per_epoch = 10;
    cfg.training.batch_size = 12;
    cfg
}

#[test]
fn same_seed_same_log() {
    for variant in [Variant::Ppot, Variant::SamplePot] {
        let cfg = ExperimentConfig { variant, ..short(3) };
        let data = generate_scenario(&cfg.scenario).unwrap();
        let a = train(&cfg, &data).unwrap();
        let b = train(&cfg, &data).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.checkpoint.to_text(), b.checkpoint.to_text());
    }
    let data = generate_scenario(&short(3).scenario).unwrap();
    let other = train(&ExperimentConfig { seed: 4, ..short(3) }, &data).unwrap();
    assert_ne!(train(&short(3), &data).unwrap().log, other.log);
}

#[test]
fn every_iteration_satisfies_weight_identities() {
    let cfg = short(1);
    let data = generate_scenario(&cfg.scenario).unwrap();
    let out = train(&cfg, &data).unwrap();
    let b = cfg.training.batch_size;
    assert_eq!(out.log.len(), 30);
    for row in &out.log {
        assert!((row.sum_wt - b as f64).abs() < 1e-9, "{row:?}");
        assert!((row.sum_ws - data.source_classes as f64).abs() < 1e-9, "{row:?}");
        assert_eq!(row.wu_nonzero, retained_count(b, cfg.training.keep_fraction).min(row.wu_candidates));
        assert!(row.alpha >= 2.0 / b as f64 && row.alpha <= 1.0);
    }
}

#[test]
fn warmup_epochs_train_plain_cross_entropy() {
    let mut cfg = short(2);
    cfg.training.warmup_epochs = 1;
    let data = generate_scenario(&cfg.scenario).unwrap();
    let out = train(&cfg, &data).unwrap();
    let warm = &out.log[..cfg.training.iters_per_epoch];
    assert!(warm.iter().all(|r| r.ot == 0.0 && r.wu_nonzero == 0 && (r.total - r.rce).abs() < 1e-12));
    assert!(warm.iter().all(|r| r.beta == 1.0));

    assert!(out.log[cfg.training.iters_per_epoch..].iter().any(|r| r.ot > 0.0));
}

#[test]
fn checkpoint_file_reproduces_evaluation() {
    let cfg = short(5);
    let data = generate_scenario(&cfg.scenario).unwrap();
    let out = train(&cfg, &data).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.txt");
    out.checkpoint.save(&path).unwrap();
    let loaded = Checkpoint::load(&path).unwrap();
    let a = evaluate(&out.checkpoint, &data, 0.75).unwrap();
    let b = evaluate(&loaded, &data, 0.75).unwrap();
    assert_eq!(a.h_score, b.h_score);
    assert_eq!(loaded.meta_value::<String>("config_hash").unwrap(), cfg.hash());
}

#[test]
fn sweep_grid_expands_cartesian_product() {
    let grid = SweepGrid::parse(&["eta1=0,5", "seed=1,2,3"]).unwrap();
    let points = grid.points();
    assert_eq!(points.len(), 6);
    let configs: Vec<_> = points.iter().map(|p| SweepGrid::apply(&short(0), p).unwrap()).collect();
    assert!(configs.iter().any(|c| c.loss.eta1 == 0.0 && c.seed == 3 && c.scenario.seed == 3));
    assert!(SweepGrid::parse(&["nonsense=1"]).and_then(|g| SweepGrid::apply(&short(0), &g.points()[0])).is_err());
}

#[test]
fn cli_runs_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.toml");
    std::fs::write(&config, short(0).to_toml()).unwrap();
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_ppot")).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    let cfg = config.to_str().unwrap();
    let out = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();

    run(&["gen-data", "--config", cfg, "--seed", "2", "--out", &out("data")]);
    run(&["train", "--config", cfg, "--seed", "2", "--variant", "sample-pot", "--out", &out("run")]);
    let checkpoint = out("run/checkpoint.txt");
    let data = out("data/dataset.csv");
    run(&["evaluate", "--config", cfg, "--seed", "2", "--checkpoint", &checkpoint, "--data", &data, "--out", &out("eval")]);
    run(&["check-theorems", "--config", cfg, "--instances", "5", "--out", &out("checks")]);
    run(&["sweep", "--config", cfg, "--grid", "eta3=0,2", "--out", &out("sweep")]);

    for file in ["data/dataset.csv", "run/train_log.csv", "run/config.toml", "eval/eval.csv", "eval/per_class.csv", "checks/checks.csv", "checks/alignment.csv", "sweep/sweep.csv"] {
        assert!(dir.path().join(file).is_file(), "missing {file}");
    }
    let saved = ExperimentConfig::load(&dir.path().join("run/config.toml")).unwrap();
    assert_eq!((saved.seed, saved.variant), (2, Variant::SamplePot));
    let log = std::fs::read_to_string(dir.path().join("run/train_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 31);

    let bad = Command::new(env!("CARGO_BIN_EXE_ppot")).args(["train", "--variant", "nope"]).output().unwrap();
    assert!(!bad.status.success());
}
