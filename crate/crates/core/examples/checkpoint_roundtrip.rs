//! Saves a trained checkpoint, reloads it and confirms predictions match.

use ppot::experiment::{predict, train, ExperimentConfig};
use ppot::net::Checkpoint;
use ppot::scenario::generate_scenario;

fn main() -> ppot::Result<()> {
    let mut config = ExperimentConfig::default();
    config.training.epochs = 5;
    let data = generate_scenario(&config.scenario)?;
    let outcome = train(&config, &data)?;

    let path = std::env::temp_dir().join("ppot_checkpoint.txt");
    outcome.checkpoint.save(&path)?;
    let restored = Checkpoint::load(&path)?;
    let xi = config.evaluation.xi;
    let before = predict(outcome.params(), data.target_x.view(), xi)?;
    let after = predict(&restored.params, data.target_x.view(), xi)?;
    println!("{} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    println!("alpha stored {:.4}", restored.meta_value::<f64>("alpha")?);
    println!("predictions identical: {}", before == after);
    Ok(())
}
