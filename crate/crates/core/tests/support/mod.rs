//! Test-only oracles, independent of the production solvers.
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum of `<P, C>` over `{P >= 0, P 1 <= a, P^T 1 <= b, sum P = s}` by
/// enumerating every basis of the standard-form LP.
///
/// Standard form: variables are the `m*n` cells, `m` row slacks and `n`
/// column slacks; constraints are the `m` row rows, the `n` column rows and
/// the total-mass row. Every vertex of the polytope is a basic feasible
/// solution, so the optimum is the best feasible basis.
pub fn vertex_enumeration_pot(a: &[f64], b: &[f64], cost: &Array2<f64>, s: f64) -> f64 {
    let (m, n) = (a.len(), b.len());
    let vars = m * n + m + n;
    let rows = m + n + 1;
    let mut matrix = Array2::<f64>::zeros((rows, vars));
    for i in 0..m {
        for j in 0..n {
            let v = i * n + j;
            matrix[[i, v]] = 1.0;
            matrix[[m + j, v]] = 1.0;
            matrix[[m + n, v]] = 1.0;
        }
        matrix[[i, m * n + i]] = 1.0;
    }
    for j in 0..n {
        matrix[[m + j, m * n + m + j]] = 1.0;
    }
    let mut rhs: Vec<f64> = a.to_vec();
    rhs.extend_from_slice(b);
    rhs.push(s);
    let var_cost: Vec<f64> = (0..vars)
        .map(|v| if v < m * n { cost[[v / n, v % n]] } else { 0.0 })
        .collect();

    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(rows);
    enumerate(0, vars, rows, &mut chosen, &mut |basis| {
        if let Some(x) = solve_basis(&matrix, &rhs, basis) {
            if x.iter().all(|&v| v >= -1e-12) {
                let obj: f64 = basis.iter().zip(&x).map(|(&col, &val)| var_cost[col] * val).sum();
                best = best.min(obj);
            }
        }
    });
    best
}

fn enumerate(
    start: usize,
    total: usize,
    need: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if chosen.len() == need {
        visit(chosen);
        return;
    }
    let remaining = need - chosen.len();
    for col in start..=total - remaining {
        chosen.push(col);
        enumerate(col + 1, total, need, chosen, visit);
        chosen.pop();
    }
}

fn solve_basis(matrix: &Array2<f64>, rhs: &[f64], basis: &[usize]) -> Option<Vec<f64>> {
    let k = basis.len();
    let mut aug = vec![vec![0.0; k + 1]; k];
    for r in 0..k {
        for (c, &col) in basis.iter().enumerate() {
            aug[r][c] = matrix[[r, col]];
        }
        aug[r][k] = rhs[r];
    }
    for c in 0..k {
        let pivot = (c..k).max_by(|&x, &y| aug[x][c].abs().total_cmp(&aug[y][c].abs()))?;
        if aug[pivot][c].abs() < 1e-10 {
            return None;
        }
        aug.swap(c, pivot);
        for r in 0..k {
            if r != c && aug[r][c] != 0.0 {
                let f = aug[r][c] / aug[c][c];
                for cc in c..=k {
                    aug[r][cc] -= f * aug[c][cc];
                }
            }
        }
    }
    Some((0..k).map(|r| aug[r][k] / aug[r][r]).collect())
}

/// Random masses `w_i / sum(w)` with small integer weights.
pub fn rational_masses(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let weights: Vec<f64> = (0..len).map(|_| rng.gen_range(1..=6) as f64).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

pub fn random_points(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Array2<f64> {
    let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
    Array2::from_shape_fn((count, dim), |_| rng.sample(normal))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_array(v: &[f64]) -> Array1<f64> {
    Array1::from(v.to_vec())
}

use ppot::net::{batch_loss, Alignment, Architecture, BatchTerms, Gradients, NetworkParams};
use ppot::objectives::LossWeights;
use rand_distr::StandardNormal;

/// A randomly drawn batch with frozen plan, prototypes and weights.
pub struct GradCase {
    pub params: NetworkParams,
    pub source: Array2<f64>,
    pub labels: Vec<usize>,
    pub target: Array2<f64>,
    pub prototypes: Array2<f64>,
    pub plan: Array2<f64>,
    pub sample_alignment: bool,
    pub w_t: Array1<f64>,
    pub w_u: Array1<f64>,
    pub w_s: Array1<f64>,
    pub loss_weights: LossWeights,
    pub unit_features: bool,
}

impl GradCase {
    /// `D_in <= 8`, `D_f <= 16`, `L <= 5`, batches of at most 12.
    pub fn random(rng: &mut ChaCha8Rng, sample_alignment: bool) -> Self {
        let arch = Architecture {
            input_dim: rng.gen_range(1..=8),
            hidden_dim: rng.gen_range(1..=10),
            feature_dim: rng.gen_range(1..=16),
            classes: rng.gen_range(2..=5),
        };
        let mut params = NetworkParams::init(arch, rng.gen());
        for t in params.tensors_mut() {
            t.iter_mut().for_each(|x| *x += 0.1 * rng.sample::<f64, _>(StandardNormal));
        }
        let (bs, bt) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let normal = |rng: &mut ChaCha8Rng, r, c| {
            Array2::from_shape_simple_fn((r, c), || rng.sample::<f64, _>(StandardNormal))
        };
        let source = normal(rng, bs, arch.input_dim);
        let target = normal(rng, bt, arch.input_dim);
        let labels = (0..bs).map(|_| rng.gen_range(0..arch.classes)).collect();
        let prototypes = normal(rng, arch.classes, arch.feature_dim);
        let rows = if sample_alignment { bs } else { arch.classes };
        let alpha = rng.gen_range(0.2..1.0);
        let mut plan = Array2::from_shape_simple_fn((rows, bt), || rng.gen_range(0.0..1.0));
        let total = plan.sum();
        plan *= alpha / total;
        let w_t = (0..bt).map(|_| rng.gen_range(0.0..2.0)).collect();
        let w_u = (0..bt).map(|_| rng.gen_range(0.0..1.0)).collect();
        let w_s = (0..arch.classes).map(|_| rng.gen_range(0.0..2.0)).collect();
        let loss_weights = LossWeights {
            eta1: rng.gen_range(0.0..6.0),
            eta2: rng.gen_range(0.0..1.0),
            eta3: rng.gen_range(0.0..3.0),
        };
        let unit_features = rng.gen_bool(0.5);
        Self { params, source, labels, target, prototypes, plan, sample_alignment, w_t, w_u, w_s, loss_weights, unit_features }
    }

    pub fn terms(&self) -> BatchTerms<'_> {
        let alignment = if self.sample_alignment {
            Alignment::Samples { plan: self.plan.view() }
        } else {
            Alignment::Prototypes { prototypes: self.prototypes.view(), plan: self.plan.view() }
        };
        BatchTerms {
            source_inputs: self.source.view(),
            source_labels: &self.labels,
            target_inputs: self.target.view(),
            alignment,
            w_t: self.w_t.view(),
            w_u: self.w_u.view(),
            w_s: self.w_s.view(),
            loss_weights: self.loss_weights,
            unit_features: self.unit_features,
        }
    }
}

/// Central finite differences of the batch loss with step `h`.
pub fn numerical_gradient(params: &NetworkParams, terms: &BatchTerms<'_>, h: f64) -> Gradients {
    let mut grad = NetworkParams::zeros(params.architecture());
    let mut probe = params.clone();
    for (t, out) in (0..6).zip(grad.tensors_mut()) {
        for (k, g) in out.iter_mut().enumerate() {
            let x = params.tensors()[t].1[k];
            probe.tensors_mut()[t][k] = x + h;
            let up = batch_loss(&probe, terms).unwrap().total;
            probe.tensors_mut()[t][k] = x - h;
            let down = batch_loss(&probe, terms).unwrap().total;
            probe.tensors_mut()[t][k] = x;
            *g = (up - down) / (2.0 * h);
        }
    }
    grad
}

/// Largest elementwise `|a - n| / max(|a|, |n|, 1e-6)` per tensor.
pub fn relative_errors(analytic: &Gradients, numeric: &Gradients) -> Vec<(&'static str, f64)> {
    analytic
        .tensors()
        .iter()
        .zip(numeric.tensors())
        .map(|((name, a), (_, n))| {
            let worst = a
                .iter()
                .zip(n)
                .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
                .fold(0.0_f64, f64::max);
            (*name, worst)
        })
        .collect()
}
