//! Compares the analytic gradient of the full training loss with central
//! finite differences on one small random batch.

use ndarray::{Array1, Array2};
use ppot::net::{backward, batch_loss, Alignment, Architecture, BatchTerms, NetworkParams};
use ppot::objectives::LossWeights;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> ppot::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let arch = Architecture { input_dim: 4, hidden_dim: 6, feature_dim: 5, classes: 3 };
    let params = NetworkParams::init(arch, 3);
    let mut normal = |r, c| Array2::from_shape_simple_fn((r, c), || rng.sample::<f64, _>(StandardNormal));
    let (xs, xt, prototypes) = (normal(6, 4), normal(8, 4), normal(3, 5));
    let labels = [0, 1, 2, 0, 1, 2];
    let plan = Array2::from_elem((3, 8), 0.6 / 24.0);
    let w_t = Array1::linspace(0.4, 1.6, 8);
    let w_u = w_t.mapv(|w: f64| (1.0 - w).max(0.0));
    let w_s = Array1::from(vec![1.2, 1.0, 0.8]);
    let terms = BatchTerms {
        source_inputs: xs.view(),
        source_labels: &labels,
        target_inputs: xt.view(),
        alignment: Alignment::Prototypes { prototypes: prototypes.view(), plan: plan.view() },
        w_t: w_t.view(),
        w_u: w_u.view(),
        w_s: w_s.view(),
        loss_weights: LossWeights::default(),
        unit_features: false,
    };

    let (loss, grads) = backward(&params, &terms)?;
    println!("loss {:.6} (rce {:.4}, pe {:.4}, ne {:.4}, ot {:.4})", loss.total, loss.rce, loss.pe, loss.ne, loss.ot);
    let h = 1e-5;
    let mut probe = params.clone();
    for (t, (name, analytic)) in grads.tensors().into_iter().enumerate() {
        let mut worst = 0.0_f64;
        for (k, &a) in analytic.iter().enumerate() {
            let x = params.tensors()[t].1[k];
            probe.tensors_mut()[t][k] = x + h;
            let up = batch_loss(&probe, &terms)?.total;
            probe.tensors_mut()[t][k] = x - h;
            let down = batch_loss(&probe, &terms)?.total;
            probe.tensors_mut()[t][k] = x;
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
        }
        println!("{name:>3}: {:>3} entries, max relative error {worst:.2e}", analytic.len());
    }
    Ok(())
}
