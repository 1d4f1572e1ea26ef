//! Small grid over the unknown-entropy weight and two seeds, written to a
//! CSV in the temp directory.

use ppot::experiment::{cmd_sweep, ExperimentConfig, SweepGrid};

fn main() -> ppot::Result<()> {
    let mut base = ExperimentConfig::default();
    base.training.epochs = 10;
    let grid = SweepGrid::parse(&["eta3=0,2", "seed=0,1"])?;
    let out = std::env::temp_dir().join("ppot_sweep");
    for row in cmd_sweep(&base, &grid, &out)? {
        println!("{:<16} H {:.3}  alpha {:.3}  config {}", row.point, row.h_score, row.alpha, row.config_hash);
    }
    println!("wrote {}", out.join("sweep.csv").display());
    Ok(())
}
