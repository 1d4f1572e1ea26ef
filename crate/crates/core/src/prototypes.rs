//! Source-class prototypes maintained by exponential moving average.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::ot::DiscreteMeasure;

/// Default EMA rate for per-batch prototype updates.
pub const DEFAULT_EMA_LAMBDA: f64 = 0.1;

/// `L` class prototypes with their class masses `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    prototypes: Array2<f64>,
    class_mass: Array1<f64>,
    ema_lambda: f64,
}

impl PrototypeSet {
    pub fn new(prototypes: Array2<f64>, class_mass: Array1<f64>, ema_lambda: f64) -> Result<Self> {
        if prototypes.nrows() == 0 {
            return Err(Error::InvalidArgument("need at least one prototype".into()));
        }
        if prototypes.nrows() != class_mass.len() {
            return Err(Error::Shape(format!(
                "{} prototypes but {} class masses",
                prototypes.nrows(),
                class_mass.len()
            )));
        }
        if !(0.0..=1.0).contains(&ema_lambda) {
            return Err(Error::InvalidArgument(format!("ema_lambda {ema_lambda} outside [0, 1]")));
        }
        if prototypes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("prototypes must be finite".into()));
        }
        crate::ot::DiscreteMeasure::from_mass(class_mass.clone())?;
        Ok(Self { prototypes, class_mass, ema_lambda })
    }

    pub fn prototypes(&self) -> ArrayView2<'_, f64> {
        self.prototypes.view()
    }

    pub fn class_mass(&self) -> ArrayView1<'_, f64> {
        self.class_mass.view()
    }

    pub fn ema_lambda(&self) -> f64 {
        self.ema_lambda
    }

    pub fn num_classes(&self) -> usize {
        self.prototypes.nrows()
    }

    pub fn dim(&self) -> usize {
        self.prototypes.ncols()
    }

    pub fn with_ema_lambda(mut self, ema_lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ema_lambda) {
            return Err(Error::InvalidArgument(format!("ema_lambda {ema_lambda} outside [0, 1]")));
        }
        self.ema_lambda = ema_lambda;
        Ok(self)
    }
}

fn check_labels(labels: &[usize], classes: usize, rows: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::Shape(format!("{rows} feature rows but {} labels", labels.len())));
    }
    if let Some(&label) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::LabelOutOfRange { label, classes });
    }
    Ok(())
}

/// Per-class sums and counts of `features`.
fn class_sums(features: ArrayView2<'_, f64>, labels: &[usize], classes: usize) -> (Array2<f64>, Vec<usize>) {
    let mut sums = Array2::zeros((classes, features.ncols()));
    let mut counts = vec![0usize; classes];
    for (row, &y) in features.outer_iter().zip(labels) {
        let mut acc = sums.row_mut(y);
        acc += &row;
        counts[y] += 1;
    }
    (sums, counts)
}

/// Class means of `features`, with class masses `r_k = count_k / m`.
pub fn compute_prototypes(
    features: ArrayView2<'_, f64>,
    labels: &[usize],
    classes: usize,
) -> Result<PrototypeSet> {
    if classes == 0 {
        return Err(Error::InvalidArgument("class count must be positive".into()));
    }
    check_labels(labels, classes, features.nrows())?;
    let (mut sums, counts) = class_sums(features, labels, classes);
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(empty));
    }
    let m = labels.len() as f64;
    for (mut row, &c) in sums.outer_iter_mut().zip(&counts) {
        row /= c as f64;
    }
    let mass = counts.iter().map(|&c| c as f64 / m).collect();
    PrototypeSet::new(sums, mass, DEFAULT_EMA_LAMBDA)
}

/// `c_k <- lambda * batch_mean_k + (1 - lambda) * c_k`; classes absent from
/// the batch keep their prototype.
pub fn ema_update(
    bank: &PrototypeSet,
    batch_features: ArrayView2<'_, f64>,
    batch_labels: &[usize],
) -> Result<PrototypeSet> {
    let classes = bank.num_classes();
    check_labels(batch_labels, classes, batch_features.nrows())?;
    if batch_features.ncols() != bank.dim() {
        return Err(Error::DimensionMismatch { expected: bank.dim(), found: batch_features.ncols() });
    }
    let (sums, counts) = class_sums(batch_features, batch_labels, classes);
    let lambda = bank.ema_lambda;
    let mut next = bank.prototypes.clone();
    for k in 0..classes {
        if counts[k] == 0 {
            continue;
        }
        let mean = &sums.row(k) / counts[k] as f64;
        let mut row = next.row_mut(k);
        row *= 1.0 - lambda;
        row.scaled_add(lambda, &mean);
    }
    Ok(PrototypeSet { prototypes: next, class_mass: bank.class_mass.clone(), ema_lambda: lambda })
}

/// The prototypes as a discrete measure with masses `r`.
pub fn prototype_measure(bank: &PrototypeSet) -> DiscreteMeasure {
    DiscreteMeasure::new(bank.prototypes.clone(), bank.class_mass.clone())
        .expect("prototype set invariants guarantee a valid measure")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mean_of_two_points() {
        let bank = compute_prototypes(array![[1.0, 1.0], [3.0, 3.0]].view(), &[0, 0], 1).unwrap();
        assert_eq!(bank.prototypes(), array![[2.0, 2.0]]);
        assert_eq!(bank.class_mass(), array![1.0]);
    }

    #[test]
    fn singleton_classes_reproduce_samples() {
        let x = array![[1.0, -2.0], [0.5, 4.0], [7.0, 7.0]];
        let bank = compute_prototypes(x.view(), &[2, 0, 1], 3).unwrap();
        assert_eq!(bank.prototypes().row(0), x.row(1));
        assert_eq!(bank.prototypes().row(1), x.row(2));
        assert_eq!(bank.prototypes().row(2), x.row(0));
    }

    #[test]
    fn means_match_reverse_order_accumulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((30, 4), |_| rng.gen_range(-3.0..3.0));
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let bank = compute_prototypes(x.view(), &labels, 3).unwrap();
        for k in 0..3 {
            let mut acc = [0.0; 4];
            let mut count = 0.0;
            for i in (0..30).rev().filter(|i| labels[*i] == k) {
                for d in 0..4 {
                    acc[d] += x[[i, d]];
                }
                count += 1.0;
            }
            for d in 0..4 {
                assert!((bank.prototypes()[[k, d]] - acc[d] / count).abs() < 1e-12);
            }
        }
        assert!((bank.class_mass().sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_class_is_an_error() {
        let err = compute_prototypes(array![[0.0], [1.0]].view(), &[0, 0], 2);
        assert!(matches!(err, Err(Error::EmptyClass(1))));
    }

    #[test]
    fn out_of_range_label_is_an_error() {
        let err = compute_prototypes(array![[0.0]].view(), &[3], 2);
        assert!(matches!(err, Err(Error::LabelOutOfRange { label: 3, classes: 2 })));
    }

    #[test]
    fn ema_endpoints() {
        let bank = compute_prototypes(array![[0.0, 0.0], [4.0, 4.0]].view(), &[0, 1], 2).unwrap();
        let batch = array![[2.0, 2.0], [3.0, 1.0]];
        let full = ema_update(&bank.clone().with_ema_lambda(1.0).unwrap(), batch.view(), &[0, 0]).unwrap();
        assert_eq!(full.prototypes().row(0), array![2.5, 1.5]);
        let frozen = ema_update(&bank.clone().with_ema_lambda(0.0).unwrap(), batch.view(), &[0, 0]).unwrap();
        assert_eq!(frozen.prototypes(), bank.prototypes());
    }

    #[test]
    fn absent_class_is_untouched() {
        let bank = compute_prototypes(array![[0.0], [4.0]].view(), &[0, 1], 2)
            .unwrap()
            .with_ema_lambda(0.3)
            .unwrap();
        let next = ema_update(&bank, array![[10.0]].view(), &[0]).unwrap();
        assert_eq!(next.prototypes()[[1, 0]], 4.0);
        assert!((next.prototypes()[[0, 0]] - 3.0).abs() < 1e-12);
        let again = ema_update(&next, array![[10.0]].view(), &[0]).unwrap();
        assert_eq!(again.prototypes()[[1, 0]], 4.0);
    }

    #[test]
    fn measure_masses() {
        let balanced = compute_prototypes(array![[0.0], [1.0], [2.0]].view(), &[0, 1, 2], 3).unwrap();
        for &m in prototype_measure(&balanced).mass() {
            assert!((m - 1.0 / 3.0).abs() < 1e-15);
        }
        let single = compute_prototypes(array![[0.0], [1.0]].view(), &[0, 0], 1).unwrap();
        assert_eq!(prototype_measure(&single).mass(), array![1.0]);
        let skewed = compute_prototypes(array![[0.0], [1.0], [2.0], [3.0]].view(), &[0, 0, 0, 1], 2).unwrap();
        assert_eq!(prototype_measure(&skewed).mass(), array![0.75, 0.25]);
    }
}
