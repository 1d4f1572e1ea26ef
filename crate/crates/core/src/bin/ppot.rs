use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ppot::experiment::{
    cmd_check_theorems, cmd_evaluate, cmd_gen_data, cmd_sweep, cmd_train, ExperimentConfig, SweepGrid, Variant,
};
use ppot::net::Checkpoint;
use ppot::scenario::{generate_scenario, read_dataset_csv};

#[derive(Parser)]
#[command(name = "ppot", version, about = "Prototypical partial OT experiments on synthetic domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides both the run seed and the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    variant: Option<Variant>,
}

impl Common {
    fn resolve(&self) -> ppot::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            config = config.with_seed(seed);
        }
        if let Some(variant) = self.variant {
            config.variant = variant;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a network and write checkpoint, log and resolved config.
    Train(Common),
    /// Score a checkpoint on a dataset (regenerated from the config if absent).
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Rejection threshold; defaults to the config value.
        #[arg(long)]
        xi: Option<f64>,
    },
    /// Verify the transport bounds on random instances and the alignment
    /// diagnostic on a trained model.
    CheckTheorems {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long)]
        skip_training: bool,
    },
    /// Train and evaluate over a cartesian grid, e.g. `--grid eta1=0,5 --grid seed=0,1`.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, required = true)]
        grid: Vec<String>,
    },
    /// Write the configured synthetic scenario to `dataset.csv`.
    GenData(Common),
}

fn run(cli: Cli) -> ppot::Result<()> {
    match cli.command {
        Command::Train(common) => {
            let config = common.resolve()?;
            let outcome = cmd_train(&config, &common.out)?;
            let last = outcome.log.last().expect("at least one iteration");
            println!(
                "trained {} iterations ({} solver fallbacks): alpha {:.4} beta {:.4} loss {:.4}",
                outcome.log.len(),
                outcome.skipped_iterations(),
                last.alpha,
                last.beta,
                last.total
            );
        }
        Command::Evaluate { common, checkpoint, data, xi } => {
            let config = common.resolve()?;
            let checkpoint = Checkpoint::load(&checkpoint)?;
            let data = match data {
                Some(path) => read_dataset_csv(File::open(path)?)?,
                None => generate_scenario(&config.scenario)?,
            };
            let xi = xi.unwrap_or(config.evaluation.xi);
            let report = cmd_evaluate(&checkpoint, &data, xi, &config, &common.out)?;
            println!(
                "h-score {:.4} (common {:.4}, unknown {:.4}), overall {:.4}",
                report.h_score, report.common_accuracy, report.private_accuracy, report.overall_accuracy
            );
        }
        Command::CheckTheorems { common, instances, skip_training } => {
            let config = common.resolve()?;
            let summary = cmd_check_theorems(&config, instances, skip_training, &common.out)?;
            println!("{} checks, {} failures", summary.records.len(), summary.failures);
            if let Some(d) = &summary.alignment {
                println!(
                    "partial transport {:.4} -> {:.4}, common-class transport {:.4} -> {:.4}",
                    d.pot_pre, d.pot_post, d.ot_common_pre, d.ot_common_post
                );
            }
            if summary.failures > 0 {
                return Err(ppot::Error::InvalidArgument(format!("{} bound checks failed", summary.failures)));
            }
        }
        Command::Sweep { common, grid } => {
            let config = common.resolve()?;
            let grid = SweepGrid::parse(&grid)?;
            for row in cmd_sweep(&config, &grid, &common.out)? {
                println!("{:<40} h-score {:.4}", row.point, row.h_score);
            }
        }
        Command::GenData(common) => {
            let config = common.resolve()?;
            let data = cmd_gen_data(&config, &common.out)?;
            println!(
                "{} source / {} target samples, true alpha {:.4}",
                data.source_y.len(),
                data.target_y.len(),
                data.truth_alpha
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
