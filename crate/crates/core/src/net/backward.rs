use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::params::{Forward, Gradients, NetworkParams};
use crate::error::{Error, Result};
use crate::objectives::{LossWeights, PROBABILITY_FLOOR};

/// What the transport term aligns target features with.
#[derive(Debug, Clone, Copy)]
pub enum Alignment<'a> {
    /// Fixed prototypes (`L x D_f`) and an `L x b_t` plan.
    Prototypes { prototypes: ArrayView2<'a, f64>, plan: ArrayView2<'a, f64> },
    /// Source batch features and a `b_s x b_t` plan; both sides receive gradient.
    Samples { plan: ArrayView2<'a, f64> },
}

/// Everything held fixed while differentiating one batch loss.
#[derive(Debug, Clone, Copy)]
pub struct BatchTerms<'a> {
    pub source_inputs: ArrayView2<'a, f64>,
    pub source_labels: &'a [usize],
    pub target_inputs: ArrayView2<'a, f64>,
    pub alignment: Alignment<'a>,
    pub w_t: ArrayView1<'a, f64>,
    pub w_u: ArrayView1<'a, f64>,
    pub w_s: ArrayView1<'a, f64>,
    pub loss_weights: LossWeights,
    /// Measure transport cost between length-normalised features; the
    /// prototypes must then live in the same normalised space.
    pub unit_features: bool,
}

/// Batch-mean loss components and their combination.
///
/// `rce` is divided by the source batch size, `pe` and `ne` by the target
/// batch size; `ot` is the plan cost, already a mass-weighted average.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub rce: f64,
    pub pe: f64,
    pub ne: f64,
    pub ot: f64,
    pub total: f64,
}

fn check_terms(params: &NetworkParams, t: &BatchTerms<'_>) -> Result<()> {
    let (bs, bt, l) = (t.source_inputs.nrows(), t.target_inputs.nrows(), params.wh.ncols());
    if t.source_labels.len() != bs {
        return Err(Error::Shape(format!("{bs} source inputs but {} labels", t.source_labels.len())));
    }
    if let Some(&label) = t.source_labels.iter().find(|&&y| y >= l) {
        return Err(Error::LabelOutOfRange { label, classes: l });
    }
    if t.w_t.len() != bt || t.w_u.len() != bt || t.w_s.len() != l {
        return Err(Error::Shape("weight vector lengths do not match the batch".into()));
    }
    let (rows, plan) = match t.alignment {
        Alignment::Prototypes { prototypes, plan } => {
            if prototypes.ncols() != params.w2.ncols() {
                return Err(Error::DimensionMismatch { expected: params.w2.ncols(), found: prototypes.ncols() });
            }
            (prototypes.nrows(), plan)
        }
        Alignment::Samples { plan } => (bs, plan),
    };
    if plan.dim() != (rows, bt) {
        return Err(Error::Shape(format!("plan is {:?}, expected ({rows}, {bt})", plan.dim())));
    }
    Ok(())
}

/// `d(-p log p)/dp` consistent with the floored logarithm.
fn entropy_slope(p: f64) -> f64 {
    if p >= PROBABILITY_FLOOR {
        -(p.ln() + 1.0)
    } else {
        -PROBABILITY_FLOOR.ln()
    }
}

fn entropy(row: ArrayView1<'_, f64>) -> f64 {
    row.iter().map(|&p| -p * p.max(PROBABILITY_FLOOR).ln()).sum()
}

/// Rows scaled to unit length; zero rows stay zero.
pub fn unit_rows(z: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = z.to_owned();
    for mut row in out.outer_iter_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

/// Chain rule through [`unit_rows`]: `(I - u u^T) g / |z|` per row.
fn unit_rows_backward(z: ArrayView2<'_, f64>, mut grad: Array2<f64>) -> Array2<f64> {
    for (row, mut g) in z.outer_iter().zip(grad.outer_iter_mut()) {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            let u = &row / norm;
            let along = u.dot(&g);
            g.zip_mut_with(&u, |gi, &ui| *gi = (*gi - along * ui) / norm);
        } else {
            g.fill(0.0);
        }
    }
    grad
}

/// Transport cost and its gradient with respect to the aligned target
/// features (and source features for sample alignment).
fn transport_term(
    anchors: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    plan: ArrayView2<'_, f64>,
) -> (f64, Array2<f64>, Array2<f64>) {
    let mut cost = 0.0;
    let mut d_anchor = Array2::zeros(anchors.raw_dim());
    let mut d_target = Array2::zeros(targets.raw_dim());
    for (k, a) in anchors.outer_iter().enumerate() {
        for (j, z) in targets.outer_iter().enumerate() {
            let pi = plan[[k, j]];
            if pi == 0.0 {
                continue;
            }
            let diff = &z - &a;
            let d = diff.dot(&diff).sqrt();
            cost += pi * d;
            if d > 0.0 {
                let g = diff * (pi / d);
                let mut t = d_target.row_mut(j);
                t += &g;
                let mut s = d_anchor.row_mut(k);
                s -= &g;
            }
        }
    }
    (cost, d_anchor, d_target)
}

/// Loss value of a batch without gradients.
pub fn batch_loss(params: &NetworkParams, terms: &BatchTerms<'_>) -> Result<LossBreakdown> {
    Ok(evaluate(params, terms, false)?.0)
}

/// Loss value and analytic gradients. Plan, prototypes and weights are
/// constants; distances of zero contribute no gradient.
pub fn backward(params: &NetworkParams, terms: &BatchTerms<'_>) -> Result<(LossBreakdown, Gradients)> {
    let (loss, grads) = evaluate(params, terms, true)?;
    Ok((loss, grads.expect("gradients requested")))
}

fn evaluate(
    params: &NetworkParams,
    t: &BatchTerms<'_>,
    want_grad: bool,
) -> Result<(LossBreakdown, Option<Gradients>)> {
    check_terms(params, t)?;
    let eta = t.loss_weights;
    let src = params.forward(t.source_inputs)?;
    let tgt = params.forward(t.target_inputs)?;
    let (bs, bt) = (t.source_inputs.nrows() as f64, t.target_inputs.nrows() as f64);

    // Source cross-entropy.
    let mut rce = 0.0;
    let mut d_src_logits = src.probabilities.clone();
    for (i, &y) in t.source_labels.iter().enumerate() {
        let p = src.probabilities[[i, y]];
        let w = t.w_s[y] / bs;
        rce -= t.w_s[y] * p.max(PROBABILITY_FLOOR).ln();
        let mut row = d_src_logits.row_mut(i);
        if p >= PROBABILITY_FLOOR {
            row[y] -= 1.0;
            row *= w;
        } else {
            row.fill(0.0);
        }
    }
    rce /= bs;

    // Target entropies, positively and negatively weighted.
    let mut pe = 0.0;
    let mut ne = 0.0;
    let mut d_tgt_logits = Array2::zeros(tgt.logits.raw_dim());
    for (i, p) in tgt.probabilities.outer_iter().enumerate() {
        let h = entropy(p);
        pe += t.w_t[i] * h;
        ne += t.w_u[i] * h;
        let coef = (eta.eta2 * t.w_t[i] - eta.eta3 * t.w_u[i]) / bt;
        if coef != 0.0 {
            let slopes: Array1<f64> = p.mapv(entropy_slope);
            let mean = slopes.dot(&p);
            let mut row = d_tgt_logits.row_mut(i);
            for (l, g) in row.iter_mut().enumerate() {
                *g = coef * p[l] * (slopes[l] - mean);
            }
        }
    }
    pe /= bt;
    ne /= bt;

    let embed = |z: &Array2<f64>| if t.unit_features { unit_rows(z.view()) } else { z.clone() };
    let tgt_emb = embed(&tgt.features);
    let (ot, d_anchor, d_tgt_emb) = match t.alignment {
        Alignment::Prototypes { prototypes, plan } => transport_term(prototypes, tgt_emb.view(), plan),
        Alignment::Samples { plan } => transport_term(embed(&src.features).view(), tgt_emb.view(), plan),
    };

    let total = rce + (eta.eta2 * pe - eta.eta3 * ne) + eta.eta1 * ot;
    let loss = LossBreakdown { rce, pe, ne, ot, total };
    if !want_grad {
        return Ok((loss, None));
    }

    let mut grads = NetworkParams::zeros(params.architecture());
    let pull_back = |z: &Array2<f64>, d: Array2<f64>| if t.unit_features { unit_rows_backward(z.view(), d) } else { d };
    let mut d_tgt_feat = pull_back(&tgt.features, d_tgt_emb) * eta.eta1;
    let mut d_src_feat = match t.alignment {
        Alignment::Samples { .. } => pull_back(&src.features, d_anchor) * eta.eta1,
        Alignment::Prototypes { .. } => Array2::zeros(src.features.raw_dim()),
    };
    head_backward(params, &src, &d_src_logits, &mut d_src_feat, &mut grads);
    head_backward(params, &tgt, &d_tgt_logits, &mut d_tgt_feat, &mut grads);
    extractor_backward(params, t.source_inputs, &src, &d_src_feat, &mut grads);
    extractor_backward(params, t.target_inputs, &tgt, &d_tgt_feat, &mut grads);
    Ok((loss, Some(grads)))
}

fn head_backward(
    params: &NetworkParams,
    pass: &Forward,
    d_logits: &Array2<f64>,
    d_features: &mut Array2<f64>,
    grads: &mut Gradients,
) {
    grads.wh += &pass.features.t().dot(d_logits);
    grads.bh += &d_logits.sum_axis(Axis(0));
    *d_features += &d_logits.dot(&params.wh.t());
}

fn extractor_backward(
    params: &NetworkParams,
    inputs: ArrayView2<'_, f64>,
    pass: &Forward,
    d_features: &Array2<f64>,
    grads: &mut Gradients,
) {
    grads.w2 += &pass.hidden.t().dot(d_features);
    grads.b2 += &d_features.sum_axis(Axis(0));
    let d_hidden = d_features.dot(&params.w2.t());
    let d_pre = d_hidden * &pass.hidden.mapv(|h| 1.0 - h * h);
    grads.w1 += &inputs.t().dot(&d_pre);
    grads.b1 += &d_pre.sum_axis(Axis(0));
}
