use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Nonnegative pairwise cost between `rows` source atoms and `cols` target atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix(Array2<f64>);

impl CostMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidCost(format!("entry {bad} is negative or not finite")));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub(crate) fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rows() != rows || self.cols() != cols {
            return Err(Error::Shape(format!(
                "cost matrix is {}x{}, measures need {}x{}",
                self.rows(),
                self.cols(),
                rows,
                cols
            )));
        }
        Ok(())
    }
}

/// Euclidean distance between two equal-length slices.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Pairwise L2 distances between the rows of `source` and the rows of `target`.
pub fn build_cost_matrix(
    source: ArrayView2<'_, f64>,
    target: ArrayView2<'_, f64>,
) -> Result<CostMatrix> {
    let dim = source.ncols();
    if target.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: target.ncols() });
    }
    if dim == 0 && (source.nrows() > 0 || target.nrows() > 0) {
        return Err(Error::InvalidArgument("points must have dimension >= 1".into()));
    }
    let mut out = Array2::zeros((source.nrows(), target.nrows()));
    for (i, s) in source.outer_iter().enumerate() {
        for (j, t) in target.outer_iter().enumerate() {
            out[[i, j]] = s
                .iter()
                .zip(t.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
        }
    }
    Ok(CostMatrix(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_four_five() {
        let c = build_cost_matrix(array![[0.0, 0.0]].view(), array![[3.0, 4.0]].view()).unwrap();
        assert_eq!(c.entries(), array![[5.0]]);
    }

    #[test]
    fn identical_sets_have_zero_diagonal() {
        let pts = array![[1.0, 2.0], [-3.0, 0.5], [4.0, 4.0]];
        let c = build_cost_matrix(pts.view(), pts.view()).unwrap();
        for i in 0..3 {
            assert_eq!(c.entries()[[i, i]], 0.0);
        }
    }

    #[test]
    fn matches_independent_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let src = Array2::from_shape_fn((3, 2), |_| rng.gen_range(-5.0..5.0));
        let tgt = Array2::from_shape_fn((4, 2), |_| rng.gen_range(-5.0..5.0));
        let c = build_cost_matrix(src.view(), tgt.view()).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                let dx = src[[i, 0]] - tgt[[j, 0]];
                let dy = src[[i, 1]] - tgt[[j, 1]];
                assert!((c.entries()[[i, j]] - dx.hypot(dy)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let err = build_cost_matrix(array![[0.0, 0.0]].view(), array![[1.0]].view());
        assert!(matches!(err, Err(Error::DimensionMismatch { expected: 2, found: 1 })));
    }

    #[test]
    fn rejects_negative_costs() {
        assert!(CostMatrix::new(array![[0.0, -1.0]]).is_err());
    }
}
