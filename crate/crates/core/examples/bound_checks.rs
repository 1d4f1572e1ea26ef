//! Checks the prototype-to-sample transport bound on random instances and
//! prints the tightness of each check.

use ppot::ppot::{random_instance, theorem1_check};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ppot::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    println!("{:>4} {:>3} {:>3} {:>3} {:>6} {:>9} {:>9} {:>9}  ok", "#", "L", "n", "b", "s", "POT", "bound", "slack");
    for i in 0..10 {
        let inst = random_instance(&mut rng)?;
        let r = theorem1_check(inst.source.view(), &inst.labels, &inst.bank, inst.targets.view(), inst.s, &inst.partition)?;
        println!(
            "{i:>4} {:>3} {:>3} {:>3} {:>6.3} {:>9.4} {:>9.4} {:>9.2e}  {}",
            inst.bank.num_classes(),
            inst.targets.nrows(),
            inst.partition.batch_size(),
            inst.s,
            r.pot_value,
            r.prototype_distance_term + r.mppot_value,
            r.slack,
            r.all_hold()
        );
    }
    Ok(())
}
