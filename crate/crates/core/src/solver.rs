//! Particle-trajectory integration of the radial flow.
//!
//! The state is `(γ, ln ρ)` on a fixed Lagrangian grid. With `g = z_0/ρ`,
//!
//! `γ_t(r) = ∫_0^r δ(γ(s), γ(r)) g(s) ds + ∫_r^R δ(γ(r), γ(s)) g(s) ds`,
//! `(ln ρ)_t(r) = ∫_0^r ∂_2δ(γ(s), γ(r)) g(s) ds + ∫_r^R ∂_1δ(γ(r), γ(s)) g(s) ds`.
//!
//! Both integrals use the trapezoid rule split at `s = r`. Because every
//! kernel factors as `δ(x, y) = e^{σ(x−y)} Σ_j a_j(x) b_j(y)` for `x ≤ y`, the
//! sums over `s` become prefix and suffix recurrences, so one evaluation of the
//! right-hand side costs `O(N)`.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::interp::CubicSpline;
use crate::kernel::{apply_operator, KernelSpec};
use std::fmt;

/// Initial momentum `ω_0` and the transported density `z_0 = r^{n−1} ω_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    omega: Vec<f64>,
    z: Vec<f64>,
    nonpositive: bool,
}

impl InitialData {
    /// Checks the sample count, finiteness and that `ω_0` vanishes beyond the
    /// grid's support radius.
    pub fn new(spec: &KernelSpec, grid: &RadialGrid, omega: Vec<f64>) -> Result<Self> {
        if omega.len() != grid.len() {
            return Err(Error::InvalidData(format!(
                "ω_0 has {} samples for a grid of {} nodes",
                omega.len(),
                grid.len()
            )));
        }
        let r = grid.nodes();
        for (i, &w) in omega.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidData(format!("ω_0 is not finite at r = {}", r[i])));
            }
            if w != 0.0 && r[i] > grid.r_support() * (1.0 + 1e-12) {
                return Err(Error::InvalidData(format!(
                    "ω_0 = {w:e} at r = {} lies outside the support radius {}",
                    r[i],
                    grid.r_support()
                )));
            }
        }
        let nm1 = spec.n() as i32 - 1;
        let z = omega.iter().zip(r).map(|(&w, &x)| if nm1 == 0 { w } else { x.powi(nm1) * w }).collect();
        let nonpositive = omega.iter().all(|&w| w <= 0.0);
        Ok(Self { omega, z, nonpositive })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// `ω_0 ≤ 0` everywhere.
    pub fn is_nonpositive(&self) -> bool {
        self.nonpositive
    }

    pub fn is_zero(&self) -> bool {
        self.omega.iter().all(|&w| w == 0.0)
    }
}

/// `(t, γ, ln ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub gamma: Vec<f64>,
    pub ln_rho: Vec<f64>,
}

impl FlowState {
    /// `γ = id`, `ρ = 1` at `t = 0`.
    pub fn identity(grid: &RadialGrid) -> Self {
        Self { t: 0.0, gamma: grid.nodes().to_vec(), ln_rho: vec![0.0; grid.len()] }
    }

    pub fn rho(&self) -> Vec<f64> {
        self.ln_rho.iter().map(|l| l.exp()).collect()
    }

    /// `(min ρ, argmin)`.
    pub fn min_rho(&self) -> (f64, usize) {
        let (l, i) = self
            .ln_rho
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |(m, k), (i, &x)| if x < m { (x, i) } else { (m, k) });
        (l.exp(), i)
    }

    /// `γ` strictly increasing.
    pub fn is_monotone(&self) -> bool {
        self.gamma.windows(2).all(|w| w[1] > w[0])
    }
}

/// Time derivatives of the state.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub gamma_dot: Vec<f64>,
    pub ln_rho_dot: Vec<f64>,
}

/// Terminal status of [`LagrangianSolver::run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    BlowupDetected,
    GuardTripped,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlowupDetected => "blowup_detected",
            RunStatus::GuardTripped => "guard_tripped",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recorded step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub min_rho: f64,
    /// Lagrangian label `r_i` of the node where `ρ` is smallest.
    pub argmin_r: f64,
    pub energy: f64,
    /// Comparison margin, when a monitor is attached.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub dt: f64,
    pub horizon: f64,
    /// Blowup threshold on `min ρ`.
    pub epsilon: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { dt: 1e-3, horizon: 1.0, epsilon: 0.05 }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: RunStatus,
    pub rows: Vec<TrajectoryRow>,
    pub final_state: FlowState,
    /// Time at which `min ρ` crossed `ε` (log-linear interpolation between the
    /// last two steps).
    pub detection_time: Option<f64>,
    /// Blowup time extrapolated from the last two steps, assuming
    /// `min ρ ~ c (T − t)^p` locally: `1/(ln ρ)_t` is then linear in `t`.
    pub extrapolated_blowup: Option<f64>,
    pub message: Option<String>,
}

/// Largest number of step halvings before a step is given up.
const MAX_HALVINGS: u32 = 20;
/// The image of the support radius must stay below this fraction of `R_max`.
const GUARD_FRACTION: f64 = 0.9;

/// Integrator for one `(spec, grid, ω_0)`.
#[derive(Debug, Clone)]
pub struct LagrangianSolver<'a> {
    spec: KernelSpec,
    grid: &'a RadialGrid,
    data: &'a InitialData,
    support: usize,
}

/// `a·b`, with an exact zero whenever either factor is zero. Kernel factors
/// at the origin may be infinite exactly where they meet a zero weight.
#[inline]
fn prod(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

impl<'a> LagrangianSolver<'a> {
    pub fn new(spec: KernelSpec, grid: &'a RadialGrid, data: &'a InitialData) -> Result<Self> {
        if data.omega().len() != grid.len() {
            return Err(Error::InvalidData("initial data and grid sizes differ".into()));
        }
        Ok(Self { spec, grid, data, support: grid.support_index() })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &RadialGrid {
        self.grid
    }

    pub fn data(&self) -> &InitialData {
        self.data
    }

    fn check_guard(&self, gamma: &[f64]) -> Result<()> {
        let limit = GUARD_FRACTION * self.grid.r_max();
        let g = gamma[self.support];
        if !(g < limit) {
            return Err(Error::Guard(format!(
                "γ(t, R_support) = {g:.6} reached {GUARD_FRACTION}·R_max = {limit:.6}; enlarge R_max"
            )));
        }
        Ok(())
    }

    /// Right-hand side of the particle system.
    pub fn rhs(&self, state: &FlowState) -> Result<Rates> {
        self.check_guard(&state.gamma)?;
        let n = self.grid.len();
        let gamma = &state.gamma;
        let lambda = self.spec.lambda();
        let z = self.data.z();
        let g: Vec<f64> = z.iter().zip(&state.ln_rho).map(|(&zi, l)| prod(zi, (-l).exp())).collect();
        let left: Vec<_> = gamma.iter().map(|&x| self.spec.left_delta_factors(x)).collect();
        let right: Vec<_> = gamma.iter().map(|&x| self.spec.right_delta_factors(x)).collect();
        let terms = left[0].len;

        let mut prefix = vec![[0.0f64; 2]; n];
        for i in 1..n {
            let h = 0.5 * self.grid.step(i - 1);
            let e = (lambda * (gamma[i - 1] - gamma[i])).exp();
            for j in 0..terms {
                prefix[i][j] =
                    e * (prefix[i - 1][j] + h * prod(left[i - 1].v[j], g[i - 1])) + h * prod(left[i].v[j], g[i]);
            }
        }
        let mut suffix = vec![[0.0f64; 2]; n];
        for i in (0..n - 1).rev() {
            let h = 0.5 * self.grid.step(i);
            let e = (lambda * (gamma[i] - gamma[i + 1])).exp();
            for j in 0..terms {
                suffix[i][j] =
                    e * (suffix[i + 1][j] + h * prod(right[i + 1].v[j], g[i + 1])) + h * prod(right[i].v[j], g[i]);
            }
        }
        let mut gamma_dot = vec![0.0; n];
        let mut ln_rho_dot = vec![0.0; n];
        for i in 0..n {
            let mut gd = 0.0;
            let mut ld = 0.0;
            for j in 0..terms {
                gd += prod(right[i].v[j], prefix[i][j]) + prod(left[i].v[j], suffix[i][j]);
                ld += prod(right[i].d[j], prefix[i][j]) + prod(left[i].d[j], suffix[i][j]);
            }
            gamma_dot[i] = gd;
            ln_rho_dot[i] = ld;
        }
        Ok(Rates { gamma_dot, ln_rho_dot })
    }

    fn advance(&self, state: &FlowState, k: &Rates, c: f64) -> FlowState {
        FlowState {
            t: state.t + c,
            gamma: state.gamma.iter().zip(&k.gamma_dot).map(|(x, d)| x + c * d).collect(),
            ln_rho: state.ln_rho.iter().zip(&k.ln_rho_dot).map(|(x, d)| x + c * d).collect(),
        }
    }

    fn try_step(&self, state: &FlowState, k1: &Rates, dt: f64) -> Result<FlowState> {
        let mut stages = Vec::with_capacity(3);
        let mut prev = k1.clone();
        for c in [0.5 * dt, 0.5 * dt, dt] {
            let s = self.advance(state, &prev, c);
            if !s.is_monotone() {
                return Err(Error::Domain(format!("γ lost monotonicity inside a step at t = {}", state.t)));
            }
            prev = self.rhs(&s)?;
            stages.push(prev.clone());
        }
        let (k2, k3, k4) = (&stages[0], &stages[1], &stages[2]);
        let n = state.gamma.len();
        let mut next = FlowState { t: state.t + dt, gamma: vec![0.0; n], ln_rho: vec![0.0; n] };
        for i in 0..n {
            next.gamma[i] = state.gamma[i]
                + dt / 6.0 * (k1.gamma_dot[i] + 2.0 * k2.gamma_dot[i] + 2.0 * k3.gamma_dot[i] + k4.gamma_dot[i]);
            next.ln_rho[i] = state.ln_rho[i]
                + dt / 6.0 * (k1.ln_rho_dot[i] + 2.0 * k2.ln_rho_dot[i] + 2.0 * k3.ln_rho_dot[i] + k4.ln_rho_dot[i]);
        }
        next.gamma[0] = 0.0;
        if !next.is_monotone() {
            return Err(Error::Domain(format!("γ lost monotonicity at t = {}", next.t)));
        }
        self.check_guard(&next.gamma)?;
        Ok(next)
    }

    /// One classical RK4 step in `(γ, ln ρ)`. A step whose stages or result
    /// break monotonicity of `γ` or the truncation guard is retried with half
    /// the step, at most 20 times; the returned state carries the time actually
    /// reached.
    pub fn step(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        let k1 = self.rhs(state)?;
        self.step_with(state, &k1, dt)
    }

    fn step_with(&self, state: &FlowState, k1: &Rates, dt: f64) -> Result<FlowState> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let mut h = dt;
        let mut last_err = None;
        for _ in 0..=MAX_HALVINGS {
            match self.try_step(state, k1, h) {
                Ok(s) => return Ok(s),
                Err(e) => last_err = Some(e),
            }
            h *= 0.5;
        }
        Err(last_err.expect("at least one attempt"))
    }

    /// `E = ∫ z_0 γ_t / ρ dr` by the trapezoid rule, given the rates at `state`.
    pub fn energy(&self, state: &FlowState, rates: &Rates) -> f64 {
        let w = self.grid.weights();
        let z = self.data.z();
        (0..w.len()).map(|i| prod(z[i], rates.gamma_dot[i] * (-state.ln_rho[i]).exp()) * w[i]).sum()
    }

    /// Integrates from the identity until the horizon, until `min ρ ≤ ε`, or
    /// until the truncation guard trips. `monitor` is called on every recorded
    /// state and its value stored as the row's margin.
    pub fn run(&self, opts: &RunOptions, mut monitor: Option<&mut dyn FnMut(&FlowState) -> f64>) -> Result<RunResult> {
        if !(opts.dt > 0.0 && opts.dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {}", opts.dt)));
        }
        if !(opts.epsilon > 0.0 && opts.epsilon < 1.0) {
            return Err(Error::Domain(format!("ε must lie in (0, 1), got {}", opts.epsilon)));
        }
        if !(opts.horizon >= 0.0 && opts.horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be finite and ≥ 0, got {}", opts.horizon)));
        }
        let r = self.grid.nodes();
        let mut state = FlowState::identity(self.grid);
        let mut rates = self.rhs(&state)?;
        let mut rows = Vec::new();
        let record = |state: &FlowState, rates: &Rates, monitor: &mut Option<&mut dyn FnMut(&FlowState) -> f64>| {
            let (m, i) = state.min_rho();
            TrajectoryRow {
                t: state.t,
                min_rho: m,
                argmin_r: r[i],
                energy: self.energy(state, rates),
                margin: monitor.as_mut().map(|f| f(state)),
            }
        };
        rows.push(record(&state, &rates, &mut monitor));
        let mut status = RunStatus::Completed;
        let mut message = None;
        let mut detection_time = None;
        let mut extrapolated = None;
        let tol = 1e-12 * opts.horizon.max(1.0);
        while state.t < opts.horizon - tol {
            let h = opts.dt.min(opts.horizon - state.t);
            let next = match self.step_with(&state, &rates, h) {
                Ok(s) => s,
                Err(e @ Error::Guard(_)) => {
                    status = RunStatus::GuardTripped;
                    message = Some(e.to_string());
                    break;
                }
                Err(e) => return Err(e),
            };
            let next_rates = match self.rhs(&next) {
                Ok(k) => k,
                Err(e @ Error::Guard(_)) => {
                    status = RunStatus::GuardTripped;
                    message = Some(e.to_string());
                    break;
                }
                Err(e) => return Err(e),
            };
            let (m_old, i_old) = state.min_rho();
            let (m_new, i_new) = next.min_rho();
            let (t1, g1) = (state.t, rates.ln_rho_dot[i_old]);
            let (t2, g2) = (next.t, next_rates.ln_rho_dot[i_new]);
            state = next;
            rates = next_rates;
            rows.push(record(&state, &rates, &mut monitor));
            if m_new <= opts.epsilon {
                status = RunStatus::BlowupDetected;
                let (l0, l1, le) = (m_old.ln(), m_new.ln(), opts.epsilon.ln());
                let t0 = state.t - h;
                let frac = if l1 < l0 { ((l0 - le) / (l0 - l1)).clamp(0.0, 1.0) } else { 1.0 };
                detection_time = Some(t0 + frac * h);
                if g1 < 0.0 && g2 < 0.0 {
                    let (y1, y2) = (1.0 / g1, 1.0 / g2);
                    if y2 != y1 {
                        let tb = t2 - y2 * (t2 - t1) / (y2 - y1);
                        if tb.is_finite() && tb >= t2 {
                            extrapolated = Some(tb);
                        }
                    }
                }
                break;
            }
        }
        Ok(RunResult { status, rows, final_state: state, detection_time, extrapolated_blowup: extrapolated, message })
    }

    /// Semi-discrete velocity at an arbitrary Eulerian point beyond the last
    /// particle, where only the prefix sum contributes.
    fn far_velocity(&self, state: &FlowState, x: f64) -> f64 {
        let n = self.grid.len();
        let gamma = &state.gamma;
        let lambda = self.spec.lambda();
        let z = self.data.z();
        let right = self.spec.right_delta_factors(x);
        let mut u = 0.0;
        let w = self.grid.weights();
        for k in 0..n {
            let gk = prod(z[k], (-state.ln_rho[k]).exp());
            if gk == 0.0 {
                continue;
            }
            let a = self.spec.left_delta_factors(gamma[k]);
            let e = (lambda * (gamma[k] - x)).exp();
            for j in 0..a.len {
                u += w[k] * e * a.v[j] * right.v[j] * gk;
            }
        }
        u
    }

    /// Diagnostic for the transport law `γ^{n−1} ρ² ω(t, γ) = r^{n−1} ω_0`.
    ///
    /// The velocity is known at the particles `γ_i`; a natural cubic spline
    /// carries it to the fixed grid (beyond the last particle the exact
    /// far-field sum is used), the operator is applied there to get `ω(t, ·)`,
    /// and a second spline evaluates `ω` back at the particles. The result is
    /// `max_i |γ_i^{n−1} ρ_i² ω(t, γ_i) − z_0(r_i)| / max|z_0|`. Accuracy is
    /// limited by both interpolations.
    pub fn transport_residual(&self, state: &FlowState) -> Result<f64> {
        let z = self.data.z();
        let zmax = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if zmax == 0.0 {
            return Ok(0.0);
        }
        let rates = self.rhs(state)?;
        let r = self.grid.nodes();
        let gamma = &state.gamma;
        let last = *gamma.last().expect("non-empty grid");
        let spline_u = CubicSpline::new(gamma, &rates.gamma_dot);
        let u_fixed: Vec<f64> =
            r.iter().map(|&x| if x <= last { spline_u.eval(x) } else { self.far_velocity(state, x) }).collect();
        let omega_fixed = apply_operator(&self.spec, self.grid, &u_fixed)?;
        let spline_w = CubicSpline::new(r, &omega_fixed);
        let nm1 = self.spec.n() as i32 - 1;
        let mut worst = 0.0f64;
        for i in 0..r.len() {
            let g = gamma[i];
            let om = if g <= self.grid.r_max() { spline_w.eval(g) } else { 0.0 };
            let rho = state.ln_rho[i].exp();
            let lhs = if nm1 == 0 { rho * rho * om } else { g.powi(nm1) * rho * rho * om };
            worst = worst.max((lhs - z[i]).abs());
        }
        Ok(worst / zmax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_momentum_is_stationary() {
        let grid = RadialGrid::uniform(64, 10.0, 5.0).unwrap();
        let spec = KernelSpec::new(1, 2, 3).unwrap();
        let data = InitialData::new(&spec, &grid, vec![0.0; 64]).unwrap();
        let solver = LagrangianSolver::new(spec, &grid, &data).unwrap();
        let s0 = FlowState::identity(&grid);
        let s1 = solver.step(&s0, 0.1).unwrap();
        assert_eq!(s1.gamma, s0.gamma);
        assert_eq!(s1.ln_rho, s0.ln_rho);
        assert_eq!(s1.t, 0.1);
        assert_eq!(solver.transport_residual(&s1).unwrap(), 0.0);
    }

    #[test]
    fn momentum_outside_support_is_rejected() {
        let grid = RadialGrid::uniform(64, 10.0, 5.0).unwrap();
        let spec = KernelSpec::new(0, 1, 2).unwrap();
        let mut omega = vec![0.0; 64];
        omega[50] = -1.0;
        assert!(InitialData::new(&spec, &grid, omega).is_err());
    }
}
