use super::cost::build_cost_matrix;
use super::exact::solve_exact_ot;
use super::measure::DiscreteMeasure;
use crate::error::{Error, Result};

/// Mean of exact OT costs between paired mini-batches.
///
/// Batch `i` pairs `source_batches[i]` with `target_batches[i]`; each batch
/// measure is the restriction of its parent with masses renormalized to one.
pub fn minibatch_ot(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    source_batches: &[Vec<usize>],
    target_batches: &[Vec<usize>],
) -> Result<f64> {
    if source_batches.is_empty() || source_batches.len() != target_batches.len() {
        return Err(Error::InvalidPartition(format!(
            "{} source batches vs {} target batches",
            source_batches.len(),
            target_batches.len()
        )));
    }
    let size = source_batches[0].len();
    if size == 0
        || source_batches.iter().chain(target_batches).any(|batch| batch.len() != size)
    {
        return Err(Error::InvalidPartition("batches must all have the same size".into()));
    }
    for &idx in source_batches.iter().flatten() {
        if idx >= mu.len() {
            return Err(Error::InvalidPartition(format!("source index {idx} out of range")));
        }
    }
    for &idx in target_batches.iter().flatten() {
        if idx >= nu.len() {
            return Err(Error::InvalidPartition(format!("target index {idx} out of range")));
        }
    }

    let mut total = 0.0;
    for (src, tgt) in source_batches.iter().zip(target_batches) {
        let a = mu.renormalized_subset(src)?;
        let b = nu.renormalized_subset(tgt)?;
        let cost = build_cost_matrix(a.support(), b.support())?;
        total += solve_exact_ot(&a, &b, &cost)?.objective();
    }
    Ok(total / source_batches.len() as f64)
}
