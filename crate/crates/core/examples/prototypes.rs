//! Class prototypes from labelled features, then moving-average updates
//! from a drifting mini-batch.

use ndarray::array;
use ppot::prototypes::{compute_prototypes, ema_update, prototype_measure};

fn main() -> ppot::Result<()> {
    let features = array![[0.0, 0.0], [0.2, 0.0], [3.0, 3.0], [3.2, 2.8], [3.0, 3.2]];
    let labels = [0, 0, 1, 1, 1];
    let mut bank = compute_prototypes(features.view(), &labels, 2)?.with_ema_lambda(0.25)?;
    println!("prototypes\n{:.3}\nclass mass {:.3}", bank.prototypes(), bank.class_mass());

    // Class 1 drifts away; class 0 is absent from the batches and stays put.
    let batch = array![[5.0, 5.0], [5.0, 5.0]];
    for step in 1..=4 {
        bank = ema_update(&bank, batch.view(), &[1, 1])?;
        println!("step {step}: class 0 {:.3}, class 1 {:.3}", bank.prototypes().row(0), bank.prototypes().row(1));
    }
    let measure = prototype_measure(&bank);
    println!("prototype measure has {} atoms, total mass {:.3}", measure.len(), measure.mass().sum());
    Ok(())
}
