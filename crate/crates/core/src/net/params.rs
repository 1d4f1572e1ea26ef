use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Layer sizes of the extractor and head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub feature_dim: usize,
    pub classes: usize,
}

/// Two-layer tanh extractor `z = tanh(x W1 + b1) W2 + b2` followed by the
/// linear head `logits = z Wh + bh`. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub wh: Array2<f64>,
    pub bh: Array1<f64>,
}

pub type Gradients = NetworkParams;

/// Activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub hidden: Array2<f64>,
    pub features: Array2<f64>,
    pub logits: Array2<f64>,
    pub probabilities: Array2<f64>,
}

impl NetworkParams {
    pub fn zeros(arch: Architecture) -> Self {
        Self {
            w1: Array2::zeros((arch.input_dim, arch.hidden_dim)),
            b1: Array1::zeros(arch.hidden_dim),
            w2: Array2::zeros((arch.hidden_dim, arch.feature_dim)),
            b2: Array1::zeros(arch.feature_dim),
            wh: Array2::zeros((arch.feature_dim, arch.classes)),
            bh: Array1::zeros(arch.classes),
        }
    }

    /// Glorot-uniform weights and zero biases.
    pub fn init(arch: Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut glorot = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-limit..limit))
        };
        let mut p = Self::zeros(arch);
        p.w1 = glorot(arch.input_dim, arch.hidden_dim);
        p.w2 = glorot(arch.hidden_dim, arch.feature_dim);
        p.wh = glorot(arch.feature_dim, arch.classes);
        p
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            input_dim: self.w1.nrows(),
            hidden_dim: self.w1.ncols(),
            feature_dim: self.w2.ncols(),
            classes: self.wh.ncols(),
        }
    }

    /// Parameter tensors in a fixed order, with names.
    pub fn tensors(&self) -> [(&'static str, &[f64]); 6] {
        [
            ("w1", self.w1.as_slice().expect("standard layout")),
            ("b1", self.b1.as_slice().expect("standard layout")),
            ("w2", self.w2.as_slice().expect("standard layout")),
            ("b2", self.b2.as_slice().expect("standard layout")),
            ("wh", self.wh.as_slice().expect("standard layout")),
            ("bh", self.bh.as_slice().expect("standard layout")),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
            self.wh.as_slice_mut().expect("standard layout"),
            self.bh.as_slice_mut().expect("standard layout"),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|x| x.is_finite()))
    }

    /// Feature extractor only.
    pub fn features(&self, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(self.extract(inputs)?.1)
    }

    /// Features as seen by the transport terms: unit-length rows when
    /// `unit` is set, raw features otherwise.
    pub fn embedding(&self, inputs: ArrayView2<'_, f64>, unit: bool) -> Result<Array2<f64>> {
        let z = self.features(inputs)?;
        Ok(if unit { super::backward::unit_rows(z.view()) } else { z })
    }

    fn extract(&self, inputs: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array2<f64>)> {
        if inputs.ncols() != self.w1.nrows() {
            return Err(Error::DimensionMismatch { expected: self.w1.nrows(), found: inputs.ncols() });
        }
        let hidden = (inputs.dot(&self.w1) + &self.b1).mapv_into(f64::tanh);
        let features = hidden.dot(&self.w2) + &self.b2;
        Ok((hidden, features))
    }

    pub fn forward(&self, inputs: ArrayView2<'_, f64>) -> Result<Forward> {
        let (hidden, features) = self.extract(inputs)?;
        let logits = features.dot(&self.wh) + &self.bh;
        let probabilities = softmax(logits.view());
        Ok(Forward { hidden, features, logits, probabilities })
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}
