use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Endless stream of batches with equally many samples of every class.
///
/// Each class is drawn from its own shuffled pool; an exhausted pool is
/// reshuffled and reused, so small classes repeat before large ones do.
#[derive(Debug, Clone)]
pub struct ClassBalancedSampler {
    pools: Vec<Vec<usize>>,
    cursors: Vec<usize>,
    per_class: usize,
    rng: ChaCha8Rng,
}

impl ClassBalancedSampler {
    /// Classes are `0..=max(labels)`; each needs at least one sample.
    pub fn new(labels: &[usize], batch_size: usize, seed: u64) -> Result<Self> {
        let classes = labels.iter().max().map_or(0, |&m| m + 1);
        if classes == 0 {
            return Err(Error::EmptyMeasure);
        }
        if batch_size == 0 || batch_size % classes != 0 {
            return Err(Error::InvalidArgument(format!(
                "batch size {batch_size} is not a positive multiple of {classes} classes"
            )));
        }
        let mut pools = vec![Vec::new(); classes];
        for (i, &y) in labels.iter().enumerate() {
            pools[y].push(i);
        }
        if let Some(empty) = pools.iter().position(Vec::is_empty) {
            return Err(Error::EmptyClass(empty));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for pool in &mut pools {
            pool.shuffle(&mut rng);
        }
        Ok(Self { cursors: vec![0; classes], pools, per_class: batch_size / classes, rng })
    }

    pub fn next_batch(&mut self) -> Vec<usize> {
        let mut batch = Vec::with_capacity(self.per_class * self.pools.len());
        for (pool, cursor) in self.pools.iter_mut().zip(&mut self.cursors) {
            for _ in 0..self.per_class {
                if *cursor == pool.len() {
                    pool.shuffle(&mut self.rng);
                    *cursor = 0;
                }
                batch.push(pool[*cursor]);
                *cursor += 1;
            }
        }
        batch
    }
}

impl Iterator for ClassBalancedSampler {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        Some(self.next_batch())
    }
}

/// Shorthand for [`ClassBalancedSampler::new`].
pub fn class_balanced_batches(labels: &[usize], batch_size: usize, seed: u64) -> Result<ClassBalancedSampler> {
    ClassBalancedSampler::new(labels, batch_size, seed)
}
