//! Numerical verification of the kernel conditions behind the comparison
//! argument, and the Liouville majorant that bounds the blowup time.
//!
//! For a nonpositive momentum the monitored quantity `q = Q(γ) ρ / Q(r)`
//! satisfies `∂_t ln q ≤ −C ∫_r^∞ s^{n−1}|ω_0|/Q ds` provided
//!
//! * (a) `φ > 0` on `0 ≤ r ≤ s`,
//! * (b) `∂²(ln φ)/∂r∂s ≥ 0` there,
//! * (c) the diagonal function `S` is bounded below by `C > 0`.
//!
//! The certificate checks (a)–(c) on sample meshes, takes `C` from the sampled
//! minimum of `S`, and builds `q̃(t, r) = (1 − (C t/2) M(r))²`, which reaches
//! zero at `T_bound = 2/(C M(0))`.

use crate::grid::RadialGrid;
use crate::kernel::{ln_q_weight, log_phi_mixed_partial, phi, s_criterion, volume_over_q, KernelPoint, KernelSpec};
use crate::solver::{FlowState, TrajectoryRow};
use std::fmt::Write as _;

/// Points per axis of the logarithmic mesh.
const MESH: usize = 200;
/// Smallest positive mesh radius.
const MESH_MIN: f64 = 1e-3;
/// Offsets of the near-diagonal band, in multiples of [`MESH_MIN`].
const BAND: usize = 10;
/// Logarithmic samples of `S` (the origin is added separately).
const S_SAMPLES: usize = 400;
/// Safety margin subtracted from the sampled minimum of `S`.
const C_MARGIN: f64 = 1e-9;
/// Rounding allowance for condition (b).
const SUPERMODULARITY_TOL: f64 = 1e-9;
/// Allowed undershoot of the dominance margin.
pub const DOMINANCE_TOL: f64 = 1e-4;

/// Outcome of one sampled condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub passed: bool,
    /// Smallest sampled value.
    pub worst_value: f64,
    /// `(r, s)` where it occurred; for `S` only `r` is meaningful.
    pub worst_point: (f64, f64),
    pub samples: usize,
}

impl ConditionCheck {
    fn new() -> Self {
        Self { passed: true, worst_value: f64::INFINITY, worst_point: (0.0, 0.0), samples: 0 }
    }

    fn observe(&mut self, value: f64, r: f64, s: f64) {
        self.samples += 1;
        if !(value >= self.worst_value) {
            self.worst_value = value;
            self.worst_point = (r, s);
        }
    }
}

/// Result of [`certify`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupCertificate {
    pub spec: KernelSpec,
    /// `false` for momenta with a positive part; the comparison is not claimed.
    pub applicable: bool,
    pub positivity: ConditionCheck,
    pub supermodularity: ConditionCheck,
    pub s_bound: ConditionCheck,
    /// Sampled `min S` minus the safety margin.
    pub c: f64,
    /// `Q(r_i)` on the grid.
    pub q: Vec<f64>,
    /// `M(r_i) = ∫_{r_i}^{R_max} s^{n−1}|ω_0|/Q ds`.
    pub majorant_tail: Vec<f64>,
    /// `2/(C M(0))`, `+∞` for zero momentum.
    pub t_bound: f64,
    ln_q: Vec<f64>,
    leading_power: i32,
}

fn log_space(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..m).map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp()).collect()
}

/// Checks the conditions for `spec` up to the grid radius and assembles the
/// majorant for `omega0` sampled on `grid`. Failures are recorded in the
/// certificate rather than returned as errors.
pub fn certify(spec: &KernelSpec, grid: &RadialGrid, omega0: &[f64]) -> BlowupCertificate {
    let r_max = grid.r_max();
    let mesh = log_space(MESH_MIN, r_max, MESH);

    let mut positivity = ConditionCheck::new();
    let mut supermod = ConditionCheck::new();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(MESH * (MESH + 1) / 2 + MESH * (BAND + 1));
    for (i, &r) in mesh.iter().enumerate() {
        for &s in &mesh[i..] {
            pairs.push((r, s));
        }
        for j in 1..=BAND {
            pairs.push((r, r + j as f64 * MESH_MIN));
        }
    }
    for &(r, s) in &pairs {
        let pt = KernelPoint::new(r, s).expect("mesh points are ordered");
        positivity.observe(phi(spec, pt), r, s);
        supermod.observe(log_phi_mixed_partial(spec, pt), r, s);
    }
    // The origin row enters positivity only: ln φ is not differentiable in r there
    // for every kernel.
    for &s in &mesh {
        let pt = KernelPoint::new(0.0, s).expect("ordered");
        positivity.observe(phi(spec, pt), 0.0, s);
    }
    positivity.passed = positivity.worst_value > 0.0 && positivity.worst_value.is_finite();
    supermod.passed = supermod.worst_value >= -SUPERMODULARITY_TOL;

    let mut s_bound = ConditionCheck::new();
    let mut radii = vec![0.0];
    radii.extend(log_space(MESH_MIN, r_max, S_SAMPLES));
    for &r in &radii {
        let v = s_criterion(spec, r).unwrap_or(f64::NAN);
        s_bound.observe(v, r, r);
    }
    let c = s_bound.worst_value - C_MARGIN;
    s_bound.passed = c > 0.0 && c.is_finite();

    let r = grid.nodes();
    let ln_q: Vec<f64> = r.iter().map(|&x| ln_q_weight(spec, x)).collect();
    let q = ln_q.iter().map(|l| l.exp()).collect();
    let density: Vec<f64> =
        r.iter().zip(omega0).map(|(&x, &w)| if w == 0.0 { 0.0 } else { w.abs() * volume_over_q(spec, x) }).collect();
    let majorant_tail = grid.tail_integrals(&density);
    let m0 = majorant_tail[0];
    let t_bound = if m0 > 0.0 && c > 0.0 { 2.0 / (c * m0) } else { f64::INFINITY };
    let applicable = omega0.iter().all(|&w| w <= 0.0);

    BlowupCertificate {
        spec: *spec,
        applicable,
        positivity,
        supermodularity: supermod,
        s_bound,
        c,
        q,
        majorant_tail,
        t_bound,
        ln_q,
        leading_power: spec.q_leading_power(),
    }
}

impl BlowupCertificate {
    /// All three conditions hold on the samples.
    pub fn conditions_pass(&self) -> bool {
        self.positivity.passed && self.supermodularity.passed && self.s_bound.passed
    }

    /// Conditions hold and the momentum is nonpositive.
    pub fn passed(&self) -> bool {
        self.applicable && self.conditions_pass()
    }

    /// `q̃(t, r_i) = (1 − (C t/2) M(r_i))²`.
    pub fn majorant(&self, t: f64, i: usize) -> f64 {
        let a = 1.0 - 0.5 * self.c * t * self.majorant_tail[i];
        a * a
    }

    /// `q(t, r_i) = Q(γ_i) ρ_i / Q(r_i)`. At `r = 0` the ratio of weights is
    /// replaced by its limit `ρ(t, 0)^m`, `m` the leading power of `Q`.
    pub fn monitored_quantity(&self, state: &FlowState) -> Vec<f64> {
        state
            .gamma
            .iter()
            .zip(&state.ln_rho)
            .zip(&self.ln_q)
            .map(|((&g, &lr), &lq)| {
                if g == 0.0 && self.leading_power != 0 {
                    (lr * (self.leading_power as f64 + 1.0)).exp()
                } else {
                    (ln_q_weight(&self.spec, g) - lq + lr).exp()
                }
            })
            .collect()
    }

    /// `min_i [q̃(t, r_i) − q(t, r_i)]`.
    pub fn margin(&self, state: &FlowState) -> f64 {
        self.monitored_quantity(state)
            .iter()
            .enumerate()
            .map(|(i, &q)| self.majorant(state.t, i) - q)
            .fold(f64::INFINITY, f64::min)
    }

    /// Dominance over a recorded trajectory whose rows carry margins.
    pub fn check_dominance(&self, rows: &[TrajectoryRow]) -> DominanceReport {
        let mut worst = f64::INFINITY;
        let mut worst_t = 0.0;
        let mut missing = 0;
        for row in rows {
            match row.margin {
                Some(m) if m < worst => {
                    worst = m;
                    worst_t = row.t;
                }
                Some(_) => {}
                None => missing += 1,
            }
        }
        let initial = rows.first().and_then(|r| r.margin);
        DominanceReport {
            passed: missing == 0 && worst >= -DOMINANCE_TOL,
            worst_margin: worst,
            worst_time: worst_t,
            initial_margin: initial,
        }
    }

    /// Human-readable `key: value` lines.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let cond = |c: &ConditionCheck| if c.passed { "pass" } else { "fail" };
        let _ = writeln!(s, "spec: {}", self.spec);
        let _ = writeln!(s, "applicable: {}", self.applicable);
        let _ = writeln!(s, "passed: {}", self.passed());
        let _ = writeln!(
            s,
            "positivity: {} (min phi = {:.6e} at r = {:.6e}, s = {:.6e}; {} samples)",
            cond(&self.positivity),
            self.positivity.worst_value,
            self.positivity.worst_point.0,
            self.positivity.worst_point.1,
            self.positivity.samples
        );
        let _ = writeln!(
            s,
            "log_supermodularity: {} (min mixed partial = {:.6e} at r = {:.6e}, s = {:.6e}; {} samples)",
            cond(&self.supermodularity),
            self.supermodularity.worst_value,
            self.supermodularity.worst_point.0,
            self.supermodularity.worst_point.1,
            self.supermodularity.samples
        );
        let _ = writeln!(
            s,
            "s_bound: {} (min S = {:.12e} at r = {:.6e}; {} samples)",
            cond(&self.s_bound),
            self.s_bound.worst_value,
            self.s_bound.worst_point.0,
            self.s_bound.samples
        );
        let _ = writeln!(s, "C: {:.12e}", self.c);
        let _ = writeln!(s, "M(0): {:.12e}", self.majorant_tail[0]);
        let _ = writeln!(s, "T_bound: {:.12e}", self.t_bound);
        s
    }
}

/// Result of [`BlowupCertificate::check_dominance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceReport {
    pub passed: bool,
    pub worst_margin: f64,
    pub worst_time: f64,
    pub initial_margin: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_momentum_never_blows_up() {
        let grid = RadialGrid::uniform(128, 10.0, 5.0).unwrap();
        let spec = KernelSpec::new(0, 1, 3).unwrap();
        let cert = certify(&spec, &grid, &vec![0.0; 128]);
        assert!(cert.passed());
        assert_eq!(cert.t_bound, f64::INFINITY);
        assert_eq!(cert.majorant(3.0, 5), 1.0);
    }

    #[test]
    fn mixed_sign_is_not_applicable() {
        let grid = RadialGrid::uniform(128, 10.0, 5.0).unwrap();
        let spec = KernelSpec::new(0, 1, 1).unwrap();
        let mut w = vec![0.0; 128];
        w[10] = 1.0;
        w[20] = -1.0;
        let cert = certify(&spec, &grid, &w);
        assert!(cert.conditions_pass());
        assert!(!cert.passed());
    }
}
