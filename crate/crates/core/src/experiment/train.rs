use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{ExperimentConfig, Variant};
use crate::error::{Error, Result};
use crate::net::{
    backward, sgd_step, Alignment, Architecture, BatchTerms, Checkpoint, ClassBalancedSampler, LossBreakdown,
    unit_rows,
    NetworkParams, OptimizerState,
};
use crate::objectives::{
    alpha_floor, source_class_weights, LossWeights, source_row_caps, target_weights, unknown_weights, MassEstimates,
    WeightVectors,
};
use crate::ot::{build_cost_matrix, pot_sinkhorn, CostMatrix};
use crate::prototypes::{compute_prototypes, ema_update};
use crate::scenario::ScenarioDataset;

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainLogRow {
    pub seed: u64,
    pub config_hash: String,
    pub variant: String,
    pub epoch: usize,
    pub iteration: usize,
    pub rce: f64,
    pub pe: f64,
    pub ne: f64,
    pub ot: f64,
    pub total: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lr: f64,
    pub sum_wt: f64,
    pub sum_ws: f64,
    pub wu_nonzero: usize,
    pub wu_candidates: usize,
    pub solver_converged: bool,
}

impl TrainLogRow {
    #[allow(clippy::too_many_arguments)]
    fn new(
        config: &ExperimentConfig,
        hash: &str,
        epoch: usize,
        iteration: usize,
        loss: &LossBreakdown,
        alpha: f64,
        beta: f64,
        lr: f64,
        weights: &WeightVectors,
        solver_converged: bool,
    ) -> Self {
        Self {
            seed: config.seed,
            config_hash: hash.to_owned(),
            variant: config.variant.to_string(),
            epoch,
            iteration,
            rce: loss.rce,
            pe: loss.pe,
            ne: loss.ne,
            ot: loss.ot,
            total: loss.total,
            alpha,
            beta,
            lr,
            sum_wt: weights.target_known.sum(),
            sum_ws: weights.source_class.sum(),
            wu_nonzero: weights.target_unknown.iter().filter(|&&u| u > 0.0).count(),
            wu_candidates: weights.target_known.iter().filter(|&&w| w < 1.0).count(),
            solver_converged,
        }
    }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub initial_params: NetworkParams,
    pub log: Vec<TrainLogRow>,
    /// Estimates at the end of every epoch.
    pub alpha_trajectory: Vec<f64>,
    pub beta_trajectory: Vec<f64>,
}

impl TrainOutcome {
    pub fn params(&self) -> &NetworkParams {
        &self.checkpoint.params
    }

    pub fn skipped_iterations(&self) -> usize {
        self.log.iter().filter(|r| !r.solver_converged).count()
    }
}

/// Largest softmax probability of every row.
pub fn confidences(probabilities: ArrayView2<'_, f64>) -> Array1<f64> {
    probabilities.map_axis(Axis(1), |row| row.fold(0.0_f64, |m, &p| m.max(p)))
}

pub fn architecture(config: &ExperimentConfig, data: &ScenarioDataset) -> Architecture {
    Architecture {
        input_dim: data.feature_dim(),
        hidden_dim: config.training.hidden_dim,
        feature_dim: config.training.feature_dim,
        classes: data.source_classes,
    }
}

/// Cycles through seeded shuffles of the target indices, dropping the
/// remainder so every batch has exactly `b` members.
struct TargetBatches {
    order: Vec<usize>,
    usable: usize,
    pos: usize,
    b: usize,
    rng: ChaCha8Rng,
}

impl TargetBatches {
    fn new(n: usize, b: usize, seed: u64) -> Self {
        let mut s = Self { order: (0..n).collect(), usable: n - n % b, pos: 0, b, rng: ChaCha8Rng::seed_from_u64(seed) };
        s.reshuffle();
        s
    }

    fn reshuffle(&mut self) {
        self.order.shuffle(&mut self.rng);
        self.pos = 0;
    }

    fn next_batch(&mut self) -> Vec<usize> {
        if self.pos + self.b > self.usable {
            self.reshuffle();
        }
        let batch = self.order[self.pos..self.pos + self.b].to_vec();
        self.pos += self.b;
        batch
    }
}

/// Plan and weights of the most recent successful solve.
struct Step {
    plan: Array2<f64>,
    weights: WeightVectors,
}

/// Per-class mean of the per-sample weights `(b / alpha) * row_sum`.
fn class_mean_sample_weights(plan: ArrayView2<'_, f64>, labels: &[usize], classes: usize, alpha: f64) -> Array1<f64> {
    let scale = labels.len() as f64 / alpha;
    let mut sums = Array1::<f64>::zeros(classes);
    let mut counts = Array1::<f64>::zeros(classes);
    for (row, &y) in plan.outer_iter().zip(labels) {
        sums[y] += scale * row.sum();
        counts[y] += 1.0;
    }
    Array1::from_shape_fn(classes, |k| if counts[k] > 0.0 { sums[k] / counts[k] } else { 0.0 })
}

fn solver_cost(cost: &CostMatrix, normalize: bool) -> Result<CostMatrix> {
    let max = cost.max();
    if normalize && max > 0.0 {
        CostMatrix::new(cost.entries().mapv(|c| c / max))
    } else {
        Ok(cost.clone())
    }
}

/// Runs the full training loop on `data`.
///
/// Each epoch starts by recomputing prototypes and `alpha` from the whole
/// dataset. Each iteration then: samples a class-balanced source batch and a
/// target batch, moves the prototypes toward the batch means, takes an EMA
/// step of `alpha`, solves the entropic partial problem with mass `alpha`
/// and row caps scaled by `alpha / beta`, derives the weights, takes an EMA
/// step of `beta`, and applies one SGD step with plan and prototypes frozen.
///
/// A solve that fails to converge is logged and the previous plan reused.
/// During warm-up epochs no plan is solved: the step uses unit weights, a
/// zero plan and plain source cross-entropy, and `beta` is left untouched.
pub fn train(config: &ExperimentConfig, data: &ScenarioDataset) -> Result<TrainOutcome> {
    config.validate()?;
    let tc = &config.training;
    let b = tc.batch_size;
    let classes = data.source_classes;
    if b % classes != 0 {
        return Err(Error::InvalidConfig(format!("batch_size {b} not divisible by {classes} classes")));
    }
    if data.target_x.nrows() < b {
        return Err(Error::InvalidConfig("fewer target samples than one batch".into()));
    }
    let embed = |z: Array2<f64>| if tc.normalize_features { unit_rows(z.view()) } else { z };
    let hash = config.hash();
    let mut seeds = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = NetworkParams::init(architecture(config, data), seeds.gen());
    let initial_params = params.clone();
    let mut sampler = ClassBalancedSampler::new(&data.source_y, b, seeds.gen())?;
    let mut targets = TargetBatches::new(data.target_x.nrows(), b, seeds.gen());
    let mut estimates = MassEstimates {
        alpha: 1.0,
        beta: 1.0,
        lambda1: config.estimates.lambda1,
        lambda2: config.estimates.lambda2,
        tau1: config.estimates.tau1,
        tau2: config.estimates.tau2,
        floor: alpha_floor(b),
    };
    let total_steps = tc.epochs * tc.iters_per_epoch;
    let mut opt = OptimizerState::new(&params, config.optimizer, total_steps);
    let uniform_b = Array1::from_elem(b, 1.0 / b as f64);
    let mut previous: Option<Step> = None;
    let mut log = Vec::with_capacity(total_steps);
    let (mut alpha_trajectory, mut beta_trajectory) = (Vec::new(), Vec::new());

    for epoch in 0..tc.epochs {
        let source_features = embed(params.features(data.source_x.view())?);
        let mut bank = compute_prototypes(source_features.view(), &data.source_y, classes)?.with_ema_lambda(tc.ema_lambda)?;
        let target_probs = params.forward(data.target_x.view())?.probabilities;
        estimates.reset_alpha(confidences(target_probs.view()).view());

        let warming = epoch < tc.warmup_epochs;

        for iteration in 0..tc.iters_per_epoch {
            let src_idx = sampler.next_batch();
            let tgt_idx = targets.next_batch();
            let xs = data.source_x.select(Axis(0), &src_idx);
            let ys: Vec<usize> = src_idx.iter().map(|&i| data.source_y[i]).collect();
            let xt = data.target_x.select(Axis(0), &tgt_idx);
            let src = params.forward(xs.view())?;
            let tgt = params.forward(xt.view())?;
            let (src_emb, tgt_emb) = (embed(src.features.clone()), embed(tgt.features.clone()));

            bank = ema_update(&bank, src_emb.view(), &ys)?;
            let alpha = estimates.update_alpha(confidences(tgt.probabilities.view()).view());
            let beta_prev = estimates.beta;

            let (caps, cost) = match config.variant {
                Variant::Ppot => (
                    source_row_caps(bank.class_mass(), alpha, beta_prev),
                    build_cost_matrix(bank.prototypes(), tgt_emb.view())?,
                ),
                Variant::SamplePot => (
                    source_row_caps(uniform_b.view(), alpha, beta_prev),
                    build_cost_matrix(src_emb.view(), tgt_emb.view())?,
                ),
            };
            let unit_step = || Step {
                plan: Array2::zeros(cost.entries().raw_dim()),
                weights: WeightVectors {
                    target_known: Array1::ones(b),
                    target_unknown: Array1::zeros(b),
                    source_class: Array1::ones(classes),
                },
            };
            if warming {
                let step = unit_step();
                let terms = BatchTerms {
                    source_inputs: xs.view(),
                    source_labels: &ys,
                    target_inputs: xt.view(),
                    alignment: match config.variant {
                        Variant::Ppot => Alignment::Prototypes { prototypes: bank.prototypes(), plan: step.plan.view() },
                        Variant::SamplePot => Alignment::Samples { plan: step.plan.view() },
                    },
                    w_t: step.weights.target_known.view(),
                    w_u: step.weights.target_unknown.view(),
                    w_s: step.weights.source_class.view(),
                    loss_weights: LossWeights::source_only(),
                    unit_features: tc.normalize_features,
                };
                let (loss, grads) = backward(&params, &terms)?;
                let lr = opt.learning_rate();
                sgd_step(&mut params, &grads, &mut opt);
                log.push(TrainLogRow::new(config, &hash, epoch, iteration, &loss, alpha, estimates.beta, lr, &step.weights, true));
                continue;
            }
            let solved = pot_sinkhorn(caps.view(), uniform_b.view(), &solver_cost(&cost, tc.normalize_cost)?, alpha, &config.solver);
            let converged = match solved {
                Ok(plan) => {
                    let plan_entries = plan.entries().to_owned();
                    let w_t = target_weights(&plan, alpha, b)?;
                    let w_u = unknown_weights(w_t.view(), tc.keep_fraction)?;
                    let w_s = match config.variant {
                        Variant::Ppot => source_class_weights(&plan, alpha, classes)?,
                        Variant::SamplePot => class_mean_sample_weights(plan_entries.view(), &ys, classes, alpha),
                    };
                    previous = Some(Step {
                        plan: plan_entries,
                        weights: WeightVectors { target_known: w_t, target_unknown: w_u, source_class: w_s },
                    });
                    true
                }
                Err(Error::NotConverged { .. }) => false,
                Err(e) => return Err(e),
            };
            let step = previous.get_or_insert_with(unit_step);
            let weights = &step.weights;
            let beta = estimates.update_beta(weights.source_class.view());

            let alignment = match config.variant {
                Variant::Ppot => Alignment::Prototypes { prototypes: bank.prototypes(), plan: step.plan.view() },
                Variant::SamplePot => Alignment::Samples { plan: step.plan.view() },
            };
            let terms = BatchTerms {
                source_inputs: xs.view(),
                source_labels: &ys,
                target_inputs: xt.view(),
                alignment,
                w_t: weights.target_known.view(),
                w_u: weights.target_unknown.view(),
                w_s: weights.source_class.view(),
                loss_weights: config.loss,
                unit_features: tc.normalize_features,
            };
            let (loss, grads) = backward(&params, &terms)?;
            let lr = opt.learning_rate();
            sgd_step(&mut params, &grads, &mut opt);
            if !params.is_finite() {
                return Err(Error::InvalidArgument(format!("parameters diverged at epoch {epoch}, iteration {iteration}")));
            }

            log.push(TrainLogRow::new(config, &hash, epoch, iteration, &loss, alpha, beta, lr, weights, converged));
        }
        alpha_trajectory.push(estimates.alpha);
        beta_trajectory.push(estimates.beta);
    }

    let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    let checkpoint = Checkpoint::new(params)
        .with_meta("alpha", estimates.alpha)
        .with_meta("beta", estimates.beta)
        .with_meta("variant", config.variant)
        .with_meta("normalize_features", tc.normalize_features)
        .with_meta("seed", config.seed)
        .with_meta("config_hash", &hash)
        .with_meta("alpha_trajectory", join(&alpha_trajectory))
        .with_meta("beta_trajectory", join(&beta_trajectory));
    Ok(TrainOutcome { checkpoint, initial_params, log, alpha_trajectory, beta_trajectory })
}
