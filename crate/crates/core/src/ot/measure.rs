use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// A finitely supported measure: atoms in R^D with nonnegative masses.
///
/// A measure built with [`DiscreteMeasure::from_mass`] has zero-dimensional
/// support and is only meaningful together with a precomputed cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    support: Array2<f64>,
    mass: Array1<f64>,
}

impl DiscreteMeasure {
    pub fn new(support: Array2<f64>, mass: Array1<f64>) -> Result<Self> {
        if support.nrows() != mass.len() {
            return Err(Error::Shape(format!(
                "support has {} atoms but mass has {} entries",
                support.nrows(),
                mass.len()
            )));
        }
        validate_mass(mass.view())?;
        Ok(Self { support, mass })
    }

    /// Uniform measure with mass `1/n` on each of the `n` rows of `support`.
    pub fn uniform(support: Array2<f64>) -> Result<Self> {
        let n = support.nrows();
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        Self::new(support, Array1::from_elem(n, 1.0 / n as f64))
    }

    pub fn from_mass(mass: Array1<f64>) -> Result<Self> {
        let n = mass.len();
        Self::new(Array2::zeros((n, 0)), mass)
    }

    pub fn support(&self) -> ArrayView2<'_, f64> {
        self.support.view()
    }

    pub fn mass(&self) -> ArrayView1<'_, f64> {
        self.mass.view()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support.ncols()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.sum()
    }

    /// Restriction to `indices`, with masses rescaled to total one.
    pub fn renormalized_subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let support = self.support.select(ndarray::Axis(0), indices);
        let mut mass = self.mass.select(ndarray::Axis(0), indices);
        let total = mass.sum();
        if total <= 0.0 {
            return Err(Error::InvalidMass("subset carries no mass".into()));
        }
        mass /= total;
        Self::new(support, mass)
    }
}

pub(crate) fn validate_mass(mass: ArrayView1<'_, f64>) -> Result<()> {
    if mass.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    if let Some(bad) = mass.iter().find(|m| !m.is_finite() || **m < 0.0) {
        return Err(Error::InvalidMass(format!("entry {bad} is negative or not finite")));
    }
    let total = mass.sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidMass(format!("total mass {total} must be positive")));
    }
    Ok(())
}
