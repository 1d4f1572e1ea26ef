//! Entropic partial transport by iterative Bregman (KL) projections.
//!
//! The plan is initialised with the Gibbs kernel `exp(-C/eps)` scaled to
//! mass `s`, then Dykstra's algorithm cycles through three KL projections:
//! row sums capped by `a`, column sums capped by `b`, total mass equal to
//! `s`. Small `eps` runs entirely on log-plans.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use super::cost::CostMatrix;
use super::exact::clamp_transported_mass;
use super::measure::{validate_mass, DiscreteMeasure};
use super::plan::TransportPlan;
use crate::error::{Error, Result};

/// Where the scaling iterations run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelDomain {
    /// Log domain when `epsilon < 1e-2` or when the kernel would underflow.
    #[default]
    Auto,
    /// Always multiply kernel entries; underflow is reported as an error.
    Kernel,
    /// Always work with log-plans.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub max_iterations: usize,
    pub marginal_tolerance: f64,
    pub domain: KernelDomain,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-2,
            max_iterations: 10_000,
            marginal_tolerance: 1e-9,
            domain: KernelDomain::Auto,
        }
    }
}

impl SolverConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self { epsilon, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.marginal_tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "marginal_tolerance must be > 0, got {}",
                self.marginal_tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Entropic partial transport of mass `s` between `mu` and `nu`.
pub fn sinkhorn_pot(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostMatrix,
    s: f64,
    cfg: &SolverConfig,
) -> Result<TransportPlan> {
    pot_sinkhorn(mu.mass(), nu.mass(), cost, s, cfg)
}

/// Entropic partial transport on raw cap vectors `a` (rows) and `b` (columns).
pub fn pot_sinkhorn(
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    cost: &CostMatrix,
    s: f64,
    cfg: &SolverConfig,
) -> Result<TransportPlan> {
    cfg.validate()?;
    validate_mass(a)?;
    validate_mass(b)?;
    cost.check_shape(a.len(), b.len())?;
    let s = clamp_transported_mass(s, a.sum(), b.sum())?;
    let (m, n) = (a.len(), b.len());
    if s == 0.0 {
        return Ok(TransportPlan::zeros(m, n));
    }

    // Zero-mass atoms carry no plan mass; solve on the active block only.
    let rows: Vec<usize> = (0..m).filter(|&i| a[i] > 0.0).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| b[j] > 0.0).collect();
    let a_act: Vec<f64> = rows.iter().map(|&i| a[i]).collect();
    let b_act: Vec<f64> = cols.iter().map(|&j| b[j]).collect();
    let c_act = cost.entries().select(Axis(0), &rows).select(Axis(1), &cols);

    let block = match cfg.domain {
        KernelDomain::Log => log_dykstra(&a_act, &b_act, c_act.view(), s, cfg)?,
        KernelDomain::Kernel => kernel_dykstra(&a_act, &b_act, c_act.view(), s, cfg)?,
        KernelDomain::Auto if cfg.epsilon < 1e-2 => log_dykstra(&a_act, &b_act, c_act.view(), s, cfg)?,
        KernelDomain::Auto => match kernel_dykstra(&a_act, &b_act, c_act.view(), s, cfg) {
            Err(Error::KernelUnderflow { .. }) => log_dykstra(&a_act, &b_act, c_act.view(), s, cfg)?,
            other => other?,
        },
    };

    let mut entries = Array2::zeros((m, n));
    for (bi, &i) in rows.iter().enumerate() {
        for (bj, &j) in cols.iter().enumerate() {
            entries[[i, j]] = block[[bi, bj]];
        }
    }
    Ok(TransportPlan::new(entries, s, cost))
}

fn violation(plan: &Array2<f64>, a: &[f64], b: &[f64], s: f64) -> f64 {
    let rows = plan
        .sum_axis(Axis(1))
        .iter()
        .zip(a)
        .fold(0.0_f64, |acc, (r, cap)| acc.max(r - cap));
    let cols = plan
        .sum_axis(Axis(0))
        .iter()
        .zip(b)
        .fold(0.0_f64, |acc, (c, cap)| acc.max(c - cap));
    rows.max(cols).max((plan.sum() - s).abs())
}

fn max_change(current: &Array2<f64>, before: &Array2<f64>) -> f64 {
    current
        .iter()
        .zip(before.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

fn kernel_dykstra(
    a: &[f64],
    b: &[f64],
    cost: ArrayView2<'_, f64>,
    s: f64,
    cfg: &SolverConfig,
) -> Result<Array2<f64>> {
    let mut k = cost.mapv(|c| (-c / cfg.epsilon).exp());
    if k.iter().any(|&x| x < f64::MIN_POSITIVE) {
        return Err(Error::KernelUnderflow { epsilon: cfg.epsilon });
    }
    k *= s / k.sum();
    let shape = k.raw_dim();
    let mut q1 = Array2::<f64>::ones(shape);
    let mut q2 = Array2::<f64>::ones(shape);
    let mut q3 = Array2::<f64>::ones(shape);

    let mut last = f64::INFINITY;
    let mut before = k.clone();
    for _ in 0..cfg.max_iterations {
        // rows
        let prev = k.clone();
        k *= &q1;
        for (mut row, &cap) in k.outer_iter_mut().zip(a) {
            let total = row.sum();
            if total > cap {
                row *= cap / total;
            }
        }
        q1 = &q1 * &prev / &k;

        // columns
        let prev = k.clone();
        k *= &q2;
        for (mut col, &cap) in k.axis_iter_mut(Axis(1)).zip(b) {
            let total = col.sum();
            if total > cap {
                col *= cap / total;
            }
        }
        q2 = &q2 * &prev / &k;

        // total mass
        let prev = k.clone();
        k *= &q3;
        let total = k.sum();
        k *= s / total;
        q3 = &q3 * &prev / &k;

        if k.iter().any(|x| !x.is_finite()) || q1.iter().chain(q2.iter()).any(|x| !x.is_finite()) {
            return Err(Error::KernelUnderflow { epsilon: cfg.epsilon });
        }
        last = violation(&k, a, b, s);
        if last < cfg.marginal_tolerance && max_change(&k, &before) < cfg.marginal_tolerance {
            return Ok(k);
        }
        before.assign(&k);
    }
    Err(Error::NotConverged { iterations: cfg.max_iterations, violation: last })
}

/// Log-domain iterations on the dual potentials: the plan is
/// `exp((f_i + g_j + h - C_ij) / eps)` with `f, g <= 0`. Each block update is
/// the exact KL projection, so one sweep is one Dykstra cycle. The potentials
/// are warm-started down a geometric schedule of `eps`, and iteration stops
/// on the duality gap rather than on per-sweep movement, which can be
/// arbitrarily small for small `eps` long before the optimum.
fn log_dykstra(
    a: &[f64],
    b: &[f64],
    cost: ArrayView2<'_, f64>,
    s: f64,
    cfg: &SolverConfig,
) -> Result<Array2<f64>> {
    let (m, n) = (a.len(), b.len());
    let log_a: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let log_s = s.ln();
    let spread = cost.iter().fold(0.0_f64, |acc, &c| acc.max(c.abs()));

    let mut schedule = vec![cfg.epsilon];
    while let Some(&last) = schedule.last() {
        if last >= spread.max(cfg.epsilon) {
            break;
        }
        schedule.push(last * EPSILON_STEP);
    }
    schedule.reverse();

    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let mut h;
    let mut scratch = vec![0.0; m.max(n)];
    let mut budget = cfg.max_iterations;
    let mut last = f64::INFINITY;

    for (stage, &eps) in schedule.iter().enumerate() {
        let last_stage = stage + 1 == schedule.len();
        // Intermediate stages only need to be roughly solved.
        let tolerance = if last_stage { cfg.marginal_tolerance } else { cfg.marginal_tolerance.sqrt() };
        let exponent = |f: &[f64], g: &[f64], h: f64, i: usize, j: usize| (f[i] + g[j] + h - cost[[i, j]]) / eps;
        h = eps * (log_s - lse((0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| exponent(&f, &g, 0.0, i, j))));
        while budget > 0 {
            budget -= 1;
            for i in 0..m {
                scratch[..n].iter_mut().enumerate().for_each(|(j, x)| *x = exponent(&f, &g, h, i, j) - f[i] / eps);
                f[i] = (eps * (log_a[i] - lse(scratch[..n].iter().copied()))).min(0.0);
            }
            for j in 0..n {
                scratch[..m].iter_mut().enumerate().for_each(|(i, x)| *x = exponent(&f, &g, h, i, j) - g[j] / eps);
                g[j] = (eps * (log_b[j] - lse(scratch[..m].iter().copied()))).min(0.0);
            }
            let total = lse((0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| exponent(&f, &g, 0.0, i, j)));
            h = eps * (log_s - total);

            let plan = Array2::from_shape_fn((m, n), |(i, j)| exponent(&f, &g, h, i, j).exp());
            last = violation(&plan, a, b, s);
            if !last.is_finite() {
                return Err(Error::NotConverged { iterations: cfg.max_iterations - budget, violation: last });
            }
            // Primal minus dual objective once the total mass is exact:
            // zero iff every capped row and column is tight.
            let gap = dual_gap(&plan, &f, &g, a, b);
            if last < tolerance && gap < tolerance {
                if last_stage {
                    return Ok(plan);
                }
                break;
            }
        }
    }
    Err(Error::NotConverged { iterations: cfg.max_iterations, violation: last })
}

fn dual_gap(plan: &Array2<f64>, f: &[f64], g: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let rows: f64 = plan.sum_axis(Axis(1)).iter().zip(f).zip(a).map(|((r, f), cap)| f * (r - cap)).sum();
    let cols: f64 = plan.sum_axis(Axis(0)).iter().zip(g).zip(b).map(|((c, g), cap)| g * (c - cap)).sum();
    (rows + cols).abs()
}

/// Ratio between successive `eps` values of the warm-start schedule.
const EPSILON_STEP: f64 = 4.0;

fn lse(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::exact::pot_exact;
    use ndarray::{array, Array1};

    #[test]
    fn constant_cost_gives_s_times_k() {
        let c = CostMatrix::new(Array2::from_elem((3, 4), 2.5)).unwrap();
        let a = Array1::from_elem(3, 1.0 / 3.0);
        let b = Array1::from_elem(4, 0.25);
        let plan = pot_sinkhorn(a.view(), b.view(), &c, 0.6, &SolverConfig::default()).unwrap();
        assert!((plan.objective() - 0.6 * 2.5).abs() < 1e-9);
    }

    #[test]
    fn two_by_two_matches_exact_within_one_percent() {
        let c = CostMatrix::new(array![[0.0, 10.0], [10.0, 1.0]]).unwrap();
        let a = array![0.5, 0.5];
        let cfg = SolverConfig::with_epsilon(1e-3);
        let exact = pot_exact(a.view(), a.view(), &c, 0.7).unwrap();
        let ent = pot_sinkhorn(a.view(), a.view(), &c, 0.7, &cfg).unwrap();
        assert!((ent.objective() - exact.objective()).abs() <= 0.01 * exact.objective());
        assert!(ent.partial_violation(a.view(), a.view(), 0.7) < 1e-9);
    }

    #[test]
    fn domains_agree() {
        let c = CostMatrix::new(array![[0.3, 1.0, 0.7], [0.9, 0.2, 0.4]]).unwrap();
        let a = array![0.5, 0.5];
        let b = array![0.3, 0.3, 0.4];
        let kernel = SolverConfig { domain: KernelDomain::Kernel, ..SolverConfig::with_epsilon(0.05) };
        let log = SolverConfig { domain: KernelDomain::Log, ..kernel };
        let p1 = pot_sinkhorn(a.view(), b.view(), &c, 0.8, &kernel).unwrap();
        let p2 = pot_sinkhorn(a.view(), b.view(), &c, 0.8, &log).unwrap();
        assert!((p1.objective() - p2.objective()).abs() < 1e-8);
    }

    #[test]
    fn explicit_kernel_domain_reports_underflow() {
        let c = CostMatrix::new(array![[0.0, 50.0], [50.0, 0.0]]).unwrap();
        let a = array![0.5, 0.5];
        let cfg = SolverConfig { domain: KernelDomain::Kernel, ..SolverConfig::with_epsilon(0.01) };
        let err = pot_sinkhorn(a.view(), a.view(), &c, 0.5, &cfg);
        assert!(matches!(err, Err(Error::KernelUnderflow { .. })));
        // Auto falls back to log-plans.
        let auto = SolverConfig::with_epsilon(0.01);
        assert!(pot_sinkhorn(a.view(), a.view(), &c, 0.5, &auto).is_ok());
    }

    #[test]
    fn non_convergence_reports_violation() {
        let c = CostMatrix::new(array![[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]]).unwrap();
        let a = array![0.4, 0.4, 0.2];
        let b = array![0.5, 0.5];
        let cfg = SolverConfig { max_iterations: 1, ..SolverConfig::with_epsilon(1e-3) };
        match pot_sinkhorn(a.view(), b.view(), &c, 0.9, &cfg) {
            Err(Error::NotConverged { iterations: 1, violation }) => assert!(violation > 0.0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_mass_atoms_stay_empty() {
        let c = CostMatrix::new(array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let a = array![0.0, 1.0];
        let b = array![0.5, 0.5];
        let plan = pot_sinkhorn(a.view(), b.view(), &c, 0.5, &SolverConfig::default()).unwrap();
        assert_eq!(plan.row_sums()[0], 0.0);
    }

    #[test]
    fn rejects_invalid_config() {
        let c = CostMatrix::new(array![[1.0]]).unwrap();
        let a = array![1.0];
        let cfg = SolverConfig { epsilon: 0.0, ..SolverConfig::default() };
        assert!(matches!(
            pot_sinkhorn(a.view(), a.view(), &c, 0.5, &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }
}
