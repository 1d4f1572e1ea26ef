//! Generates a Gaussian source/target scenario with private classes on
//! both sides and writes it as CSV.

use ppot::scenario::{generate_scenario, write_dataset_csv, ScenarioConfig};

fn main() -> ppot::Result<()> {
    let config = ScenarioConfig {
        n_common: 6,
        n_source_private: 3,
        n_target_private: 3,
        samples_per_class: 40,
        feature_dim: 8,
        ..ScenarioConfig::default()
    };
    let data = generate_scenario(&config)?;
    println!(
        "source {} x {}, target {} x {}",
        data.source_x.nrows(),
        data.feature_dim(),
        data.target_x.nrows(),
        data.feature_dim()
    );
    println!("common classes {:?}", data.common_classes());
    println!("true alpha {:.3}, true beta {:.3}", data.truth_alpha, data.truth_beta);

    let path = std::env::temp_dir().join("ppot_scenario.csv");
    write_dataset_csv(&data, std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
