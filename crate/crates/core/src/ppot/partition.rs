use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A partition of `{0..n-1}` into equally sized batches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    batches: Vec<Vec<usize>>,
    batch_size: usize,
}

impl Partition {
    /// Validates disjointness, coverage of `0..n` and equal batch sizes.
    pub fn new(batches: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let batch_size = batches.first().map_or(0, Vec::len);
        if batch_size == 0 {
            return Err(Error::InvalidPartition("partition needs a nonempty batch".into()));
        }
        if batches.iter().any(|b| b.len() != batch_size) {
            return Err(Error::InvalidPartition("batches differ in size".into()));
        }
        if batch_size * batches.len() != n {
            return Err(Error::InvalidPartition(format!(
                "{} batches of {batch_size} do not cover {n} indices",
                batches.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in batches.iter().flatten() {
            if i >= n {
                return Err(Error::InvalidPartition(format!("index {i} out of range for n = {n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPartition(format!("index {i} appears twice")));
            }
        }
        Ok(Self { batches, batch_size })
    }

    /// The trivial partition with one batch holding every index.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![(0..n).collect()], n)
    }

    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    /// Number of indices covered.
    pub fn len(&self) -> usize {
        self.batch_size * self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }
}

/// Shuffles `0..n` with `seed` and slices it into `n / b` batches.
pub fn make_partition(n: usize, b: usize, seed: u64) -> Result<Partition> {
    if b == 0 || n == 0 || n % b != 0 {
        return Err(Error::InvalidPartition(format!("batch size {b} does not divide {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Partition::new(order.chunks(b).map(<[usize]>::to_vec).collect(), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_batch() {
        let p = make_partition(4, 4, 9).unwrap();
        assert_eq!(p.num_batches(), 1);
        let mut all = p.batches()[0].clone();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }

    #[test]
    fn pairs_cover_everything() {
        let p = make_partition(6, 2, 1).unwrap();
        assert_eq!(p.num_batches(), 3);
        let mut all: Vec<usize> = p.batches().concat();
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn seeded() {
        assert_eq!(make_partition(30, 5, 42).unwrap(), make_partition(30, 5, 42).unwrap());
        assert_ne!(make_partition(30, 5, 42).unwrap(), make_partition(30, 5, 43).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_partition(7, 2, 0).is_err());
        assert!(make_partition(4, 0, 0).is_err());
        assert!(Partition::new(vec![vec![0, 1], vec![1, 2]], 4).is_err());
        assert!(Partition::new(vec![vec![0, 1], vec![2]], 3).is_err());
        assert!(Partition::new(vec![vec![0, 5]], 2).is_err());
    }
}
