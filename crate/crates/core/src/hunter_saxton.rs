//! Closed-form radial flow for the homogeneous first-order operator
//! `(σ = 0, k = 1)` in any dimension `n`.
//!
//! With `Θ(r) = ∫_r^∞ ω_0` the monitored quantity is
//! `q(t, r) = γ^{n−1} ρ / r^{n−1} = (1 + (t/2) Θ(r))²`, and since
//! `∂_r γ^n = n r^{n−1} q`,
//!
//! `γ(t, r)^n = r^n + n t F_1(r) + (n t²/4) F_2(r)`,
//! `F_1 = ∫_0^r s^{n−1} Θ`, `F_2 = ∫_0^r s^{n−1} Θ²`.
//!
//! All integrals use Gauss–Legendre panels on the momentum function itself,
//! so the solution is accurate far beyond any grid discretization.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use std::fmt;

/// Number of panels on the momentum support.
const PANELS: usize = 400;
/// Gauss points per panel.
const ORDER: usize = 10;

/// Exact solution for momentum `ω_0` supported in `[0, r_support]`.
pub struct HsExactSolution {
    n: u32,
    omega: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    bounds: Vec<f64>,
    /// `Θ`, `F_1`, `F_2` at the panel boundaries.
    theta_b: Vec<f64>,
    f1_b: Vec<f64>,
    f2_b: Vec<f64>,
    gl: GaussLegendre,
}

impl fmt::Debug for HsExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HsExactSolution")
            .field("n", &self.n)
            .field("r_support", &self.r_support())
            .finish_non_exhaustive()
    }
}

impl HsExactSolution {
    pub fn new(n: u32, omega: impl Fn(f64) -> f64 + Send + Sync + 'static, r_support: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if !(r_support > 0.0 && r_support.is_finite()) {
            return Err(Error::InvalidData(format!("support radius must be positive, got {r_support}")));
        }
        let bounds: Vec<f64> = (0..=PANELS).map(|i| r_support * i as f64 / PANELS as f64).collect();
        let mut sol = Self {
            n,
            omega: Box::new(omega),
            theta_b: vec![0.0; PANELS + 1],
            f1_b: vec![0.0; PANELS + 1],
            f2_b: vec![0.0; PANELS + 1],
            bounds,
            gl: GaussLegendre::new(ORDER),
        };
        for p in (0..PANELS).rev() {
            let piece = sol.gl.integrate(sol.bounds[p], sol.bounds[p + 1], |s| (sol.omega)(s));
            sol.theta_b[p] = sol.theta_b[p + 1] + piece;
        }
        if let Some(p) = sol.theta_b.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("momentum is not integrable near r = {}", sol.bounds[p])));
        }
        for p in 0..PANELS {
            let (a, b) = (sol.bounds[p], sol.bounds[p + 1]);
            let (i1, i2) = sol.moments(p, a, b);
            sol.f1_b[p + 1] = sol.f1_b[p] + i1;
            sol.f2_b[p + 1] = sol.f2_b[p] + i2;
        }
        Ok(sol)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r_support(&self) -> f64 {
        self.bounds[PANELS]
    }

    pub fn omega(&self, r: f64) -> f64 {
        if r > self.r_support() {
            0.0
        } else {
            (self.omega)(r)
        }
    }

    fn panel(&self, r: f64) -> usize {
        let p = (r / self.r_support() * PANELS as f64).floor() as usize;
        p.min(PANELS - 1)
    }

    /// `Θ(r) = ∫_r^∞ ω_0`.
    pub fn theta(&self, r: f64) -> f64 {
        if r >= self.r_support() {
            return 0.0;
        }
        let p = self.panel(r);
        self.theta_b[p + 1] + self.gl.integrate(r, self.bounds[p + 1], |s| (self.omega)(s))
    }

    /// `(∫_a^b s^{n−1} Θ, ∫_a^b s^{n−1} Θ²)` for `[a, b]` inside panel `p`.
    fn moments(&self, p: usize, a: f64, b: f64) -> (f64, f64) {
        let end = self.bounds[p + 1];
        let base = self.theta_b[p + 1];
        let mut i1 = 0.0;
        let mut i2 = 0.0;
        let nm1 = self.n as i32 - 1;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let g = &self.gl;
        for (x, w) in gl_pairs(g) {
            let s = mid + half * x;
            let th = base + g.integrate(s, end, |y| (self.omega)(y));
            let v = s.powi(nm1);
            i1 += w * v * th;
            i2 += w * v * th * th;
        }
        (i1 * half, i2 * half)
    }

    fn f_integrals(&self, r: f64) -> (f64, f64) {
        if r >= self.r_support() {
            return (self.f1_b[PANELS], self.f2_b[PANELS]);
        }
        let p = self.panel(r);
        let (i1, i2) = self.moments(p, self.bounds[p], r);
        (self.f1_b[p] + i1, self.f2_b[p] + i2)
    }

    /// `q(t, r) = (1 + (t/2) Θ(r))²`.
    pub fn q(&self, t: f64, r: f64) -> f64 {
        crate::liouville::exact(self.theta(r), t)
    }

    /// `(γ(t, r), ρ(t, r))`. Past the breakdown time `ρ` is still the formula
    /// value, which is nonnegative but no longer describes a flow.
    pub fn flow(&self, t: f64, r: f64) -> (f64, f64) {
        let nf = self.n as f64;
        let q = self.q(t, r);
        if r == 0.0 {
            return (0.0, q.powf(1.0 / nf));
        }
        let (f1, f2) = self.f_integrals(r);
        let gn = r.powi(self.n as i32) + nf * t * f1 + 0.25 * nf * t * t * f2;
        let gamma = gn.max(0.0).powf(1.0 / nf);
        let rho = if self.n == 1 { q } else { q * (r / gamma).powi(self.n as i32 - 1) };
        (gamma, rho)
    }

    /// `(min Θ, argmin)`. The scan covers panel ends and Gauss points and is
    /// refined by golden-section search around the best sample.
    pub fn min_theta(&self) -> (f64, f64) {
        let mut samples = Vec::with_capacity(PANELS * (ORDER + 1) + 1);
        for p in 0..PANELS {
            let (a, b) = (self.bounds[p], self.bounds[p + 1]);
            samples.push(a);
            for (x, _) in gl_pairs(&self.gl) {
                samples.push(0.5 * (a + b) + 0.5 * (b - a) * x);
            }
        }
        samples.push(self.r_support());
        let (mut best, mut arg) = (f64::INFINITY, 0usize);
        for (i, &s) in samples.iter().enumerate() {
            let v = self.theta(s);
            if v < best {
                best = v;
                arg = i;
            }
        }
        let mut lo = samples[arg.saturating_sub(1)];
        let mut hi = samples[(arg + 1).min(samples.len() - 1)];
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let x1 = hi - phi * (hi - lo);
            let x2 = lo + phi * (hi - lo);
            if self.theta(x1) <= self.theta(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        let mid = 0.5 * (lo + hi);
        let vm = self.theta(mid);
        if vm < best {
            (vm, mid)
        } else {
            (best, samples[arg])
        }
    }

    /// `T* = 2/K`, `K = max(−min Θ, 0)`; `+∞` when `Θ ≥ 0`.
    pub fn breakdown_time(&self) -> f64 {
        let k = (-self.min_theta().0).max(0.0);
        if k > 0.0 {
            2.0 / k
        } else {
            f64::INFINITY
        }
    }
}

fn gl_pairs(g: &GaussLegendre) -> impl Iterator<Item = (f64, f64)> + '_ {
    g.nodes().iter().copied().zip(g.weights().iter().copied())
}

/// `q(t, r)` for momentum `ω_0` supported in `[0, r_support]`.
pub fn hs_q(n: u32, omega: impl Fn(f64) -> f64 + Send + Sync + 'static, r_support: f64, t: f64, r: f64) -> Result<f64> {
    Ok(HsExactSolution::new(n, omega, r_support)?.q(t, r))
}

/// `(γ(t, r), ρ(t, r))`.
pub fn hs_flow(
    n: u32,
    omega: impl Fn(f64) -> f64 + Send + Sync + 'static,
    r_support: f64,
    t: f64,
    r: f64,
) -> Result<(f64, f64)> {
    Ok(HsExactSolution::new(n, omega, r_support)?.flow(t, r))
}

/// Breakdown time `T* ∈ (0, ∞]`.
pub fn hs_breakdown_time(n: u32, omega: impl Fn(f64) -> f64 + Send + Sync + 'static, r_support: f64) -> Result<f64> {
    Ok(HsExactSolution::new(n, omega, r_support)?.breakdown_time())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_momentum_has_polynomial_tails() {
        // ω = −1 on [0, 2]: Θ(r) = r − 2, minimum −2 at the origin, T* = 1.
        let sol = HsExactSolution::new(1, |_| -1.0, 2.0).unwrap();
        assert!((sol.theta(0.5) + 1.5).abs() < 1e-13);
        assert!((sol.breakdown_time() - 1.0).abs() < 1e-12);
        // n = 1: γ(t, r) = ∫_0^r (1 + (t/2)(s − 2))² ds.
        let t = 0.3;
        let r: f64 = 1.2;
        let prim = |s: f64| {
            let a = 1.0 - t;
            let b = 0.5 * t;
            a * a * s + a * b * s * s + b * b * s * s * s / 3.0
        };
        let (g, rho) = sol.flow(t, r);
        assert!((g - prim(r)).abs() < 1e-12);
        assert!((rho - (1.0 + 0.5 * t * (r - 2.0)).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn identity_at_time_zero() {
        let sol = HsExactSolution::new(3, |r| -(r * (2.0 - r)), 2.0).unwrap();
        for &r in &[0.0, 0.4, 1.7, 3.0] {
            let (g, rho) = sol.flow(0.0, r);
            assert!((g - r).abs() < 1e-13 && (rho - 1.0).abs() < 1e-13);
        }
    }
}
