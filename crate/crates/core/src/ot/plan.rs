use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::cost::CostMatrix;

/// A transport plan together with its transported mass and linear cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    entries: Array2<f64>,
    total_mass: f64,
    objective: f64,
}

impl TransportPlan {
    /// Wraps `entries`; the objective is the Frobenius product with `cost`.
    pub fn new(entries: Array2<f64>, total_mass: f64, cost: &CostMatrix) -> Self {
        let objective = frobenius(entries.view(), cost.entries());
        Self { entries, total_mass, objective }
    }

    /// Wraps `entries` whose objective is already known.
    pub fn with_objective(entries: Array2<f64>, total_mass: f64, objective: f64) -> Self {
        Self { entries, total_mass, objective }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { entries: Array2::zeros((rows, cols)), total_mass: 0.0, objective: 0.0 }
    }

    pub fn entries(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn row_sums(&self) -> Array1<f64> {
        self.entries.sum_axis(Axis(1))
    }

    pub fn col_sums(&self) -> Array1<f64> {
        self.entries.sum_axis(Axis(0))
    }

    pub fn mass(&self) -> f64 {
        self.entries.sum()
    }

    /// Largest violation of `row <= row_caps`, `col <= col_caps`, `sum = mass`
    /// and nonnegativity.
    pub fn partial_violation(
        &self,
        row_caps: ArrayView1<'_, f64>,
        col_caps: ArrayView1<'_, f64>,
        mass: f64,
    ) -> f64 {
        let rows = excess(self.row_sums().view(), row_caps);
        let cols = excess(self.col_sums().view(), col_caps);
        let negative = self.entries.iter().fold(0.0_f64, |acc, &x| acc.max(-x));
        rows.max(cols).max((self.mass() - mass).abs()).max(negative)
    }

    /// Largest violation of the equality marginals `row = mu`, `col = nu`.
    pub fn balanced_violation(&self, mu: ArrayView1<'_, f64>, nu: ArrayView1<'_, f64>) -> f64 {
        let rows = max_abs_diff(self.row_sums().view(), mu);
        let cols = max_abs_diff(self.col_sums().view(), nu);
        let negative = self.entries.iter().fold(0.0_f64, |acc, &x| acc.max(-x));
        rows.max(cols).max(negative)
    }
}

pub fn frobenius(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn excess(sums: ArrayView1<'_, f64>, caps: ArrayView1<'_, f64>) -> f64 {
    sums.iter().zip(caps.iter()).fold(0.0_f64, |acc, (s, c)| acc.max(s - c))
}

fn max_abs_diff(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}
