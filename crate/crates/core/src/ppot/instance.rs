use std::io::Write;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::bounds::{check_proposition1, theorem1_check};
use super::partition::{make_partition, Partition};
use crate::error::Result;
use crate::prototypes::{compute_prototypes, PrototypeSet};

/// A random labelled source set, its prototypes, a target set and a batch
/// partition of the targets.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub source: Array2<f64>,
    pub labels: Vec<usize>,
    pub bank: PrototypeSet,
    pub targets: Array2<f64>,
    pub s: f64,
    pub partition: Partition,
}

/// Draws an instance with `D` in 2..=8, `L` in 2..=8, `n` in 8..=32, a
/// divisor `b` of `n` and `s` in `(0, 1]`. Class sizes are uneven so the
/// class masses differ.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Result<RandomInstance> {
    let dim = rng.gen_range(2..=8);
    let classes = rng.gen_range(2..=8);
    let n = rng.gen_range(8..=32);
    let divisors: Vec<usize> = (1..=n).filter(|b| n % b == 0).collect();
    let b = divisors[rng.gen_range(0..divisors.len())];

    let mut labels: Vec<usize> = (0..classes).collect();
    let extra = rng.gen_range(0..=2 * classes);
    labels.extend((0..extra).map(|_| rng.gen_range(0..classes)));
    let centres = gaussian(rng, classes, dim, 2.0);
    let mut source = gaussian(rng, labels.len(), dim, 1.0);
    for (mut row, &y) in source.outer_iter_mut().zip(&labels) {
        row += &centres.row(y);
    }
    let bank = compute_prototypes(source.view(), &labels, classes)?;
    let targets = gaussian(rng, n, dim, 2.0);
    // Zero is excluded: gen_range over (0, 1] via 1 - [0, 1).
    let s = 1.0 - rng.gen::<f64>();
    let partition = make_partition(n, b, rng.gen())?;
    Ok(RandomInstance { source, labels, bank, targets, s, partition })
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || scale * rng.sample::<f64, _>(StandardNormal))
}

/// One line of a bound-check report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub seed: u64,
    pub instance: usize,
    pub check: &'static str,
    pub classes: usize,
    pub targets: usize,
    pub batch_size: usize,
    pub mass: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Checks both inequalities and both plan constructions on `count` random
/// instances drawn from `seed`. Four records per instance.
pub fn check_random_instances(seed: u64, count: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(4 * count);
    for instance in 0..count {
        let inst = random_instance(&mut rng)?;
        let prop = check_proposition1(&inst.bank, inst.targets.view(), inst.s, &inst.partition)?;
        let bound = theorem1_check(
            inst.source.view(),
            &inst.labels,
            &inst.bank,
            inst.targets.view(),
            inst.s,
            &inst.partition,
        )?;
        let record = |check, lhs: f64, rhs: f64, holds| CheckRecord {
            seed,
            instance,
            check,
            classes: inst.bank.num_classes(),
            targets: inst.targets.nrows(),
            batch_size: inst.partition.batch_size(),
            mass: inst.s,
            lhs,
            rhs,
            slack: rhs - lhs,
            holds,
        };
        records.push(record("proposition1", prop.lhs, prop.rhs, prop.holds && prop.feasible()));
        records.push(record(
            "theorem1",
            bound.pot_value,
            bound.prototype_distance_term + bound.mppot_value,
            bound.bound_satisfied,
        ));
        records.push(record("composite_plan", bound.composite.lower, bound.composite.cost, bound.composite.holds()));
        records.push(record("explicit_plan", bound.explicit.cost, bound.explicit.upper, bound.explicit.holds()));
    }
    Ok(records)
}

/// Writes records as CSV with a header row.
pub fn write_check_report<W: Write>(records: &[CheckRecord], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for record in records {
        out.serialize(record)?;
    }
    out.flush()?;
    Ok(())
}
