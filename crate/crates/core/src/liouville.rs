//! The nonlocal Liouville-type equation
//!
//! `∂_t ln q(t, r) = ∫_r^{R} z(s) / q(t, s) ds`,  `q(0, ·) = 1`,
//!
//! its closed-form solution `q = (1 + (t/2) Θ(r))²` with `Θ(r) = ∫_r^R z`, and
//! an independent RK4 solver used to check the formula.

use crate::error::{Error, Result};
use crate::grid::{cubic_tails, RadialGrid};

/// Signed weight samples `z(r_i)` together with their tail integrals
/// `Θ(r_i) = ∫_{r_i}^{R_max} z` (right-to-left trapezoid, computed once).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumProfile {
    samples: Vec<f64>,
    tail: Vec<f64>,
}

impl MomentumProfile {
    pub fn new(grid: &RadialGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidData(format!("{} samples for a grid of {} nodes", samples.len(), grid.len())));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite sample at node {i}")));
        }
        let tail = grid.tail_integrals(&samples);
        Ok(Self { samples, tail })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `Θ(r_i)`; non-increasing in `i` when the samples are nonnegative and
    /// zero at the last node.
    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    /// `(min_i Θ(r_i), argmin)`, first index on ties.
    pub fn min_tail(&self) -> (f64, usize) {
        min_with_index(&self.tail)
    }
}

fn min_with_index(v: &[f64]) -> (f64, usize) {
    v.iter().enumerate().fold((f64::INFINITY, 0), |(m, k), (i, &x)| if x < m { (x, i) } else { (m, k) })
}

/// `q(t, r) = (1 + (t/2) Θ(r))²` given the tail value `Θ(r)`.
///
/// Valid for any `t`; past the blowup time the square simply grows again, and
/// interpreting the zero is up to the caller.
pub fn exact(tail: f64, t: f64) -> f64 {
    let a = 1.0 + 0.5 * t * tail;
    a * a
}

/// `K = max(−min Θ, 0)`.
pub fn blowup_rate(tail: &[f64]) -> f64 {
    (-min_with_index(tail).0).max(0.0)
}

/// `T = 2/K`, or `+∞` when `K = 0`.
pub fn blowup_time(tail: &[f64]) -> f64 {
    let k = blowup_rate(tail);
    if k > 0.0 {
        2.0 / k
    } else {
        f64::INFINITY
    }
}

/// Output of [`picard_oracle`].
#[derive(Debug, Clone)]
pub struct PicardRun {
    pub dt: f64,
    /// Recorded times, starting at 0 and ending at the horizon.
    pub times: Vec<f64>,
    /// `q(t, ·)` at each recorded time.
    pub snapshots: Vec<Vec<f64>>,
    /// `∂_t ln q` at the final state.
    pub final_rate: Vec<f64>,
}

impl PicardRun {
    pub fn last(&self) -> &[f64] {
        self.snapshots.last().expect("at least the initial snapshot")
    }
}

/// Below this value of `q` the fixed-step solver is no longer trusted.
pub const ORACLE_FLOOR: f64 = 1e-3;

/// Most snapshots kept by [`picard_oracle`]; intermediate steps are thinned.
const MAX_SNAPSHOTS: usize = 257;

/// Solves the Liouville equation on the grid by classical RK4 in `ln q`.
///
/// The tail integral of `z/q` uses the fourth-order cubic rule of
/// [`RadialGrid::tail_integrals_cubic`], so the result is independent of the
/// trapezoid tail used by [`MomentumProfile`]. With `steps = None` the step
/// count is the smallest one with `max|∂_t ln q(0)|·dt ≤ 1e−3`.
pub fn picard_oracle(grid: &RadialGrid, z: &[f64], horizon: f64, steps: Option<usize>) -> Result<PicardRun> {
    if z.len() != grid.len() {
        return Err(Error::InvalidData(format!("{} samples for a grid of {} nodes", z.len(), grid.len())));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be finite and ≥ 0, got {horizon}")));
    }
    let n = grid.len();
    let weights = grid.cubic_interval_weights();
    let rate = |lnq: &[f64]| -> Vec<f64> {
        let f: Vec<f64> = z.iter().zip(lnq).map(|(zi, l)| zi * (-l).exp()).collect();
        cubic_tails(&weights, &f)
    };
    let mut lnq = vec![0.0; n];
    let steps = match steps {
        Some(s) => s.max(1),
        None => {
            let m = rate(&lnq).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            ((horizon * m / 1e-3).ceil() as usize).max(1)
        }
    };
    let dt = horizon / steps as f64;
    let stride = steps.div_ceil(MAX_SNAPSHOTS - 1);
    let mut times = vec![0.0];
    let mut snapshots = vec![vec![1.0; n]];
    let axpy = |base: &[f64], k: &[f64], c: f64| -> Vec<f64> { base.iter().zip(k).map(|(b, d)| b + c * d).collect() };
    for step in 1..=steps {
        let k1 = rate(&lnq);
        let k2 = rate(&axpy(&lnq, &k1, 0.5 * dt));
        let k3 = rate(&axpy(&lnq, &k2, 0.5 * dt));
        let k4 = rate(&axpy(&lnq, &k3, dt));
        for i in 0..n {
            lnq[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = step as f64 * dt;
        let min_q = lnq.iter().fold(f64::INFINITY, |m, l| m.min(l.exp()));
        if !(min_q >= ORACLE_FLOOR) {
            return Err(Error::Domain(format!(
                "min q = {min_q:.3e} fell below {ORACLE_FLOOR:e} at t = {t}; too close to blowup"
            )));
        }
        if step % stride == 0 || step == steps {
            times.push(t);
            snapshots.push(lnq.iter().map(|l| l.exp()).collect());
        }
    }
    let final_rate = rate(&lnq);
    Ok(PicardRun { dt, times, snapshots, final_rate })
}

/// Blowup time located from the oracle alone.
///
/// Bisection finds the last time `t_a` at which the oracle stays above
/// [`ORACLE_FLOOR`]; one Newton step on `√q` at the minimizing node, using the
/// oracle's own rate `∂_t ln q`, then moves from `t_a` to the zero of `√q`.
/// Returns `+∞` if the oracle survives `t_max`.
pub fn oracle_blowup_time(grid: &RadialGrid, z: &[f64], t_max: f64, tol: f64) -> Result<f64> {
    let survives = |t: f64| picard_oracle(grid, z, t, None).ok();
    if survives(t_max).is_some() {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (0.0, t_max);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if survives(mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let run = picard_oracle(grid, z, lo, None)?;
    let (q_min, i) = min_with_index(run.last());
    // √q' = √q · (ln q)'/2.
    let slope = 0.5 * q_min.sqrt() * run.final_rate[i];
    if slope >= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(lo - q_min.sqrt() / slope)
}
