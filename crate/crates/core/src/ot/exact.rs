//! Exact solvers for balanced and partial discrete transport.
//!
//! Both problems go through one successive-shortest-path min-cost-flow
//! routine on the complete bipartite graph. Dijkstra runs on reduced costs
//! kept nonnegative by node potentials, so each augmentation is exact up to
//! floating-point rounding.
//!
//! Partial transport of mass `s` is reduced to a balanced problem by adding
//! one slack source atom of mass `|b| - s` and one slack target atom of mass
//! `|a| - s`, both reached at zero cost. The slack-to-slack cell is removed
//! from the network, which forces exactly `s` units through real cells.

use ndarray::{Array2, ArrayView1, ArrayView2};

use super::cost::CostMatrix;
use super::measure::{validate_mass, DiscreteMeasure};
use super::plan::TransportPlan;
use crate::error::{Error, Result};

/// Relative tolerance used when comparing total masses.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Balanced optimal transport between `mu` and `nu`.
pub fn solve_exact_ot(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostMatrix,
) -> Result<TransportPlan> {
    ot_exact(mu.mass(), nu.mass(), cost)
}

/// Balanced exact transport on raw mass vectors.
pub fn ot_exact(
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    cost: &CostMatrix,
) -> Result<TransportPlan> {
    validate_mass(a)?;
    validate_mass(b)?;
    cost.check_shape(a.len(), b.len())?;
    let (sa, sb) = (a.sum(), b.sum());
    if (sa - sb).abs() > MASS_TOLERANCE * sa.max(sb) {
        return Err(Error::MassMismatch { source_mass: sa, target_mass: sb });
    }
    let flow = min_cost_flow(a.to_vec(), b.to_vec(), cost.entries(), None)?;
    Ok(TransportPlan::new(flow, sa.min(sb), cost))
}

/// Partial optimal transport moving exactly `s` units between `mu` and `nu`.
pub fn solve_exact_pot(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostMatrix,
    s: f64,
) -> Result<TransportPlan> {
    pot_exact(mu.mass(), nu.mass(), cost, s)
}

/// Partial exact transport on raw mass vectors: rows capped by `a`,
/// columns capped by `b`, total mass `s`.
pub fn pot_exact(
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    cost: &CostMatrix,
    s: f64,
) -> Result<TransportPlan> {
    validate_mass(a)?;
    validate_mass(b)?;
    cost.check_shape(a.len(), b.len())?;
    let s = clamp_transported_mass(s, a.sum(), b.sum())?;
    let (m, n) = (a.len(), b.len());
    if s == 0.0 {
        return Ok(TransportPlan::zeros(m, n));
    }

    let mut supply = a.to_vec();
    supply.push((b.sum() - s).max(0.0));
    let mut demand = b.to_vec();
    demand.push((a.sum() - s).max(0.0));
    let mut extended = Array2::zeros((m + 1, n + 1));
    extended.slice_mut(ndarray::s![..m, ..n]).assign(&cost.entries());

    let flow = min_cost_flow(supply, demand, extended.view(), Some((m, n)))?;
    let plan = flow.slice(ndarray::s![..m, ..n]).to_owned();
    Ok(TransportPlan::new(plan, s, cost))
}

/// Checks `0 <= s <= min(total_a, total_b)`, forgiving rounding-level excess.
pub(crate) fn clamp_transported_mass(s: f64, total_a: f64, total_b: f64) -> Result<f64> {
    let max = total_a.min(total_b);
    if !s.is_finite() || s < 0.0 || s > max * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::MassOutOfRange { mass: s, max });
    }
    Ok(s.min(max))
}

/// Successive shortest paths on the bipartite network `supply -> demand`.
///
/// `forbidden` removes a single cell from the network. Total supply must
/// equal total demand up to rounding.
fn min_cost_flow(
    mut supply: Vec<f64>,
    mut demand: Vec<f64>,
    cost: ArrayView2<'_, f64>,
    forbidden: Option<(usize, usize)>,
) -> Result<Array2<f64>> {
    let m = supply.len();
    let n = demand.len();
    let total: f64 = supply.iter().sum::<f64>().max(demand.iter().sum());
    let mut flow = Array2::<f64>::zeros((m, n));
    if total == 0.0 {
        return Ok(flow);
    }
    let tiny = total * 1e-14;
    let allowed = |i: usize, j: usize| forbidden != Some((i, j));

    // Node layout: sources 0..m, sinks m..m+n, super sink m+n.
    // The super source is implicit with potential 0.
    let nodes = m + n + 1;
    let sink = m + n;
    let mut potential = vec![0.0_f64; nodes];
    let mut dist = vec![f64::INFINITY; nodes];
    let mut pred = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];

    let max_rounds = 64 * (m + n + 1) * (m + n + 1) + 1024;
    for _ in 0..max_rounds {
        if supply.iter().all(|&x| x <= tiny) || demand.iter().all(|&x| x <= tiny) {
            break;
        }
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        pred.iter_mut().for_each(|p| *p = usize::MAX);
        done.iter_mut().for_each(|d| *d = false);
        for i in 0..m {
            if supply[i] > tiny {
                dist[i] = (-potential[i]).max(0.0);
            }
        }

        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (v, (&d, &fin)) in dist.iter().zip(done.iter()).enumerate() {
                if !fin && d < best {
                    best = d;
                    u = v;
                }
            }
            if u == usize::MAX || u == sink {
                break;
            }
            done[u] = true;
            if u < m {
                let i = u;
                for j in 0..n {
                    let v = m + j;
                    if done[v] || !allowed(i, j) {
                        continue;
                    }
                    let reduced = (cost[[i, j]] + potential[u] - potential[v]).max(0.0);
                    if best + reduced < dist[v] {
                        dist[v] = best + reduced;
                        pred[v] = u;
                    }
                }
            } else {
                let j = u - m;
                for i in 0..m {
                    if done[i] || flow[[i, j]] <= tiny {
                        continue;
                    }
                    let reduced = (-cost[[i, j]] + potential[u] - potential[i]).max(0.0);
                    if best + reduced < dist[i] {
                        dist[i] = best + reduced;
                        pred[i] = u;
                    }
                }
                if demand[j] > tiny && !done[sink] {
                    let reduced = (potential[u] - potential[sink]).max(0.0);
                    if best + reduced < dist[sink] {
                        dist[sink] = best + reduced;
                        pred[sink] = u;
                    }
                }
            }
        }

        let reach = dist[sink];
        if !reach.is_finite() {
            return Err(Error::InvalidArgument(
                "transport network is infeasible".into(),
            ));
        }
        for (p, d) in potential.iter_mut().zip(&dist) {
            *p += d.min(reach);
        }

        // Walk back from the super sink to find the bottleneck.
        let last = pred[sink];
        let mut delta = demand[last - m];
        let mut v = last;
        loop {
            let u = pred[v];
            if u == usize::MAX {
                delta = delta.min(supply[v]);
                break;
            }
            if v >= m {
                // u (source) -> v (sink) is a forward cell; no capacity limit.
            } else {
                delta = delta.min(flow[[v, u - m]]);
            }
            v = u;
        }

        let mut v = last;
        demand[last - m] -= delta;
        loop {
            let u = pred[v];
            if u == usize::MAX {
                supply[v] -= delta;
                break;
            }
            if v >= m {
                flow[[u, v - m]] += delta;
            } else {
                let cell = &mut flow[[v, u - m]];
                *cell -= delta;
                if *cell <= tiny {
                    *cell = 0.0;
                }
            }
            v = u;
        }
    }

    if supply.iter().any(|&x| x > tiny) && demand.iter().any(|&x| x > tiny) {
        return Err(Error::InvalidArgument(
            "min-cost flow exceeded its augmentation budget".into(),
        ));
    }
    flow.mapv_inplace(|x| if x <= tiny { 0.0 } else { x });
    Ok(flow)
}
