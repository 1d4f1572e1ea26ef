use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::net::NetworkParams;
use crate::ot::{build_cost_matrix, ot_exact, pot_exact};
use crate::scenario::ScenarioDataset;

/// Sample-level transport before and after training.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentDiagnostic {
    pub alpha: f64,
    pub source_samples: usize,
    pub target_samples: usize,
    /// `POT^alpha(p, q)` over all sampled points.
    pub pot_pre: f64,
    pub pot_post: f64,
    /// Balanced transport between the shared-class subsets.
    pub ot_common_pre: f64,
    pub ot_common_post: f64,
}

impl AlignmentDiagnostic {
    pub fn decreased(&self) -> bool {
        self.pot_post < self.pot_pre && self.ot_common_post < self.ot_common_pre
    }
}

/// Up to `per_class` indices of every label, chosen by seeded shuffle.
fn per_class_subsample(labels: &[usize], per_class: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(rng);
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut taken = vec![0usize; classes];
    let mut picked: Vec<usize> = order
        .into_iter()
        .filter(|&i| {
            let keep = taken[labels[i]] < per_class;
            taken[labels[i]] += usize::from(keep);
            keep
        })
        .collect();
    picked.sort_unstable();
    picked
}

fn uniform(n: usize) -> Array1<f64> {
    Array1::from_elem(n, 1.0 / n as f64)
}

struct Subsample<'a> {
    source: Array2<f64>,
    target: Array2<f64>,
    common_s: &'a [usize],
    common_t: &'a [usize],
    alpha: f64,
    unit: bool,
}

fn measure(params: &NetworkParams, sub: &Subsample<'_>) -> Result<(f64, f64)> {
    let (common_s, common_t, alpha) = (sub.common_s, sub.common_t, sub.alpha);
    let fs = params.embedding(sub.source.view(), sub.unit)?;
    let ft = params.embedding(sub.target.view(), sub.unit)?;
    let cost = build_cost_matrix(fs.view(), ft.view())?;
    let pot = pot_exact(uniform(fs.nrows()).view(), uniform(ft.nrows()).view(), &cost, alpha)?.objective();
    let cs = fs.select(Axis(0), common_s);
    let ct = ft.select(Axis(0), common_t);
    let cost_c = build_cost_matrix(cs.view(), ct.view())?;
    let ot = ot_exact(uniform(cs.nrows()).view(), uniform(ct.nrows()).view(), &cost_c)?.objective();
    Ok((pot, ot))
}

/// Exact `POT^alpha` between all source and target features and exact OT
/// between the shared-class subsets, under `initial` and `trained`. Both
/// domains are subsampled to `per_class` points per class; `alpha` is the
/// true shared fraction. With `unit_features` distances are taken between
/// length-normalised features, matching training.
pub fn alignment_diagnostic(
    initial: &NetworkParams,
    trained: &NetworkParams,
    data: &ScenarioDataset,
    per_class: usize,
    seed: u64,
    unit_features: bool,
) -> Result<AlignmentDiagnostic> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_idx = per_class_subsample(&data.source_y, per_class, &mut rng);
    let t_idx = per_class_subsample(&data.target_y, per_class, &mut rng);
    let source = data.source_x.select(Axis(0), &s_idx);
    let target = data.target_x.select(Axis(0), &t_idx);
    let common = data.common_classes();
    let common_s: Vec<usize> = (0..s_idx.len()).filter(|&i| common.contains(&data.source_y[s_idx[i]])).collect();
    let common_t: Vec<usize> = (0..t_idx.len()).filter(|&i| data.target_known[t_idx[i]]).collect();
    let known = common_t.len() as f64 / t_idx.len() as f64;
    let alpha = known.min(1.0);
    let sub = Subsample { source, target, common_s: &common_s, common_t: &common_t, alpha, unit: unit_features };
    let (pot_pre, ot_common_pre) = measure(initial, &sub)?;
    let (pot_post, ot_common_post) = measure(trained, &sub)?;
    Ok(AlignmentDiagnostic {
        alpha,
        source_samples: s_idx.len(),
        target_samples: t_idx.len(),
        pot_pre,
        pot_post,
        ot_common_pre,
        ot_common_post,
    })
}
