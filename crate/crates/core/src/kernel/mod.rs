//! Green kernels of the radial operators `(σ − Δ)^k`.
//!
//! Every kernel is separable on `D = {s ≥ r ≥ 0} \ {(0,0)}`:
//!
//! ```text
//! φ(r, s) = e^{σ(r−s)} Σ_j A_j(r) B_j(s)      (one or two terms)
//! ```
//!
//! with the exponential split out of the Bessel factors, so `A_j` stays bounded
//! for large `r` and `B_j` for large `s`. The solver builds its prefix/suffix
//! sums from these factors and the point evaluations below reuse them.
//!
//! For the `(σ = 1, k = 2)` kernel the three-term form is regrouped as
//! `φ = α_n(r)β_{n−2}(s)/(2n) − r² α_{n+2}(r) β_n(s)/(2(n+2))` using
//! `α_n − α_{n−2} = −r² α_{n+2}/(n(n+2))`, which removes a cancellation between
//! the two `β_n` terms.

mod operator;

pub use operator::{apply_operator, invert_operator, Inversion};

use crate::bessel;
use crate::error::{Error, Result};
use std::fmt;

/// Which inertia operator `(σ − Δ)^k` acts in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    sigma: u8,
    k: u8,
    n: u32,
}

impl KernelSpec {
    pub fn new(sigma: u8, k: u8, n: u32) -> Result<Self> {
        if sigma > 1 {
            return Err(Error::InvalidSpec(format!("sigma must be 0 or 1, got {sigma}")));
        }
        if !(1..=2).contains(&k) {
            return Err(Error::InvalidSpec(format!("k must be 1 or 2, got {k}")));
        }
        if n == 0 {
            return Err(Error::InvalidSpec("dimension n must be at least 1".into()));
        }
        if k == 2 && n < 3 {
            return Err(Error::InvalidSpec(format!(
                "k = 2 requires n ≥ 3 (the second-order kernels are not defined for n = {n})"
            )));
        }
        Ok(Self { sigma, k, n })
    }

    pub fn sigma(&self) -> u8 {
        self.sigma
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Exponent of the leading power of `Q(r)` at the origin.
    pub fn q_leading_power(&self) -> i32 {
        if self.k == 1 {
            self.n as i32 - 1
        } else {
            self.n as i32 - 3
        }
    }

    /// `S(0)`: the limit of the criterion function at the origin.
    pub fn s_at_origin(&self) -> f64 {
        let n = self.n as f64;
        match self.k {
            1 => n,
            _ => 2.0 * (n - 2.0) / (n + 2.0),
        }
    }

    pub(crate) fn lambda(&self) -> f64 {
        self.sigma as f64
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(sigma={}, k={}, n={})", self.sigma, self.k, self.n)
    }
}

/// A point of `D = {(r, s) : s ≥ r ≥ 0} \ {(0, 0)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    r: f64,
    s: f64,
}

impl KernelPoint {
    pub fn new(r: f64, s: f64) -> Result<Self> {
        if !(r >= 0.0 && s >= r && s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("({r}, {s}) is not in s ≥ r ≥ 0, s > 0")));
        }
        Ok(Self { r, s })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// Factor values at one radius: up to two terms, value and derivative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct FactorPair {
    pub len: usize,
    pub v: [f64; 2],
    pub d: [f64; 2],
}

impl FactorPair {
    fn one(v: f64, d: f64) -> Self {
        Self { len: 1, v: [v, 0.0], d: [d, 0.0] }
    }

    fn two(v: [f64; 2], d: [f64; 2]) -> Self {
        Self { len: 2, v, d }
    }
}

impl KernelSpec {
    /// `(A_j(x) e^{−σx}, A_j'(x) e^{−σx})`.
    pub(crate) fn left_factors(&self, x: f64) -> FactorPair {
        let n = self.n as f64;
        match (self.sigma, self.k) {
            (0, 1) => FactorPair::one(1.0, 0.0),
            (0, _) => FactorPair::two([1.0, x * x], [0.0, 2.0 * x]),
            (_, 1) => {
                let a = bessel::alpha_exp_scaled(self.n, x);
                let a2 = bessel::alpha_exp_scaled(self.n + 2, x);
                FactorPair::one(a, x * a2 / (n + 2.0))
            }
            _ => {
                let a2 = bessel::alpha_exp_scaled(self.n + 2, x);
                let a4 = bessel::alpha_exp_scaled(self.n + 4, x);
                let a0 = a2 + x * x * a4 / ((n + 2.0) * (n + 4.0));
                FactorPair::two(
                    [a0 / (2.0 * n), -x * x * a2 / (2.0 * (n + 2.0))],
                    [x * a2 / (2.0 * n * (n + 2.0)), -(2.0 * x * a2 + x * x * x * a4 / (n + 4.0)) / (2.0 * (n + 2.0))],
                )
            }
        }
    }

    /// `(B_j(x) e^{σx}, B_j'(x) e^{σx})` for `x > 0`.
    pub(crate) fn right_factors(&self, x: f64) -> FactorPair {
        let n = self.n as f64;
        let ni = self.n as i32;
        match (self.sigma, self.k) {
            (0, 1) => FactorPair::one(x.powi(-ni) / n, -x.powi(-ni - 1)),
            (0, _) => FactorPair::two(
                [x.powi(2 - ni) / (2.0 * n * (n - 2.0)), -x.powi(-ni) / (2.0 * n * (n + 2.0))],
                [-x.powi(1 - ni) / (2.0 * n), x.powi(-ni - 1) / (2.0 * (n + 2.0))],
            ),
            (_, 1) => {
                let (b, b2) = bessel::beta_pair_exp_scaled(self.n, x);
                FactorPair::one(b, -(n + 2.0) * x * b2)
            }
            _ => {
                let (bm, b) = bessel::beta_pair_exp_scaled(self.n - 2, x);
                let b2 = (n * b + bm / n) / ((n + 2.0) * x * x);
                FactorPair::two([bm, b], [-n * x * b, -(n + 2.0) * x * b2])
            }
        }
    }

    /// Factors of `δ = rs φ` in the left slot: `(x A_j, A_j + x A_j')`, scaled.
    pub(crate) fn left_delta_factors(&self, x: f64) -> FactorPair {
        let f = self.left_factors(x);
        let mut out = f;
        for j in 0..f.len {
            out.v[j] = x * f.v[j];
            out.d[j] = f.v[j] + x * f.d[j];
        }
        out
    }

    /// Factors of `δ` in the right slot: `(x B_j, B_j + x B_j')`, scaled.
    ///
    /// Written in terms of `x^p β_p` so the values stay finite as long as the
    /// true limit is; at `x = 0` divergent entries are `+∞`/NaN and callers
    /// multiply them only by exact zeros.
    pub(crate) fn right_delta_factors(&self, x: f64) -> FactorPair {
        let n = self.n as f64;
        let ni = self.n as i32;
        let pow = |e: i32| -> f64 {
            if e == 0 {
                1.0
            } else {
                x.powi(e)
            }
        };
        match (self.sigma, self.k) {
            (0, 1) => FactorPair::one(pow(1 - ni) / n, if ni == 1 { 0.0 } else { (1.0 - n) * pow(-ni) / n }),
            (0, _) => FactorPair::two(
                [pow(3 - ni) / (2.0 * n * (n - 2.0)), -pow(1 - ni) / (2.0 * n * (n + 2.0))],
                [(3.0 - n) * pow(2 - ni) / (2.0 * n * (n - 2.0)), (n - 1.0) * pow(-ni) / (2.0 * n * (n + 2.0))],
            ),
            (_, 1) => {
                let (bs, bs2) = power_beta_pair(self.n, x);
                FactorPair::one(pow(1 - ni) * bs, pow(-ni) * (bs - (n + 2.0) * bs2))
            }
            _ => {
                let (bsm, bs) = power_beta_pair(self.n - 2, x);
                let bs2 = (n * bs + x * x * bsm / n) / (n + 2.0);
                FactorPair::two(
                    [pow(3 - ni) * bsm, pow(1 - ni) * bs],
                    [pow(2 - ni) * (bsm - n * bs), pow(-ni) * (bs - (n + 2.0) * bs2)],
                )
            }
        }
    }
}

fn power_beta_pair(p: u32, x: f64) -> (f64, f64) {
    bessel::power_beta_pair_exp_scaled(p, x)
}

/// Scaled sums at a point: `φ̂ = Σ A_j B_j`, `∂_1 φ̂`, `∂_2 φ̂`, `∂_1∂_2 φ̂`.
/// The true values are these times `e^{σ(r−s)}`.
struct PointSums {
    phi: f64,
    d1: f64,
    d2: f64,
    d12: f64,
    scale: f64,
}

fn point_sums(spec: &KernelSpec, pt: KernelPoint) -> PointSums {
    let a = spec.left_factors(pt.r);
    let b = spec.right_factors(pt.s);
    let mut out = PointSums { phi: 0.0, d1: 0.0, d2: 0.0, d12: 0.0, scale: (spec.lambda() * (pt.r - pt.s)).exp() };
    for j in 0..a.len {
        out.phi += a.v[j] * b.v[j];
        out.d1 += a.d[j] * b.v[j];
        out.d2 += a.v[j] * b.d[j];
        out.d12 += a.d[j] * b.d[j];
    }
    out
}

/// `φ(r, s)`.
pub fn phi(spec: &KernelSpec, pt: KernelPoint) -> f64 {
    let p = point_sums(spec, pt);
    p.phi * p.scale
}

/// `δ(r, s) = r s φ(r, s)`.
pub fn delta(spec: &KernelSpec, pt: KernelPoint) -> f64 {
    pt.r * pt.s * phi(spec, pt)
}

/// `∂δ/∂r`; on the diagonal this is the one-sided limit from inside `D`.
pub fn d1_delta(spec: &KernelSpec, pt: KernelPoint) -> f64 {
    let p = point_sums(spec, pt);
    pt.s * (p.phi + pt.r * p.d1) * p.scale
}

/// `∂δ/∂s`.
pub fn d2_delta(spec: &KernelSpec, pt: KernelPoint) -> f64 {
    let p = point_sums(spec, pt);
    pt.r * (p.phi + pt.s * p.d2) * p.scale
}

/// `∂²(ln φ)/∂r∂s`, evaluated from the closed-form factor derivatives.
pub fn log_phi_mixed_partial(spec: &KernelSpec, pt: KernelPoint) -> f64 {
    let p = point_sums(spec, pt);
    (p.phi * p.d12 - p.d1 * p.d2) / (p.phi * p.phi)
}

/// `Q(r) = 1/(r φ(0, r))`, continuously extended to `r = 0`.
pub fn q_weight(spec: &KernelSpec, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("Q needs r ≥ 0, got {r}")));
    }
    Ok(ln_q_weight(spec, r).exp())
}

/// `ln Q(r)`; `−∞` where `Q` vanishes at the origin.
pub fn ln_q_weight(spec: &KernelSpec, r: f64) -> f64 {
    let n = spec.n as f64;
    let m = spec.q_leading_power() as f64;
    let ln_pow = if m == 0.0 { 0.0 } else { m * r.ln() };
    match (spec.sigma, spec.k) {
        (0, 1) => n.ln() + ln_pow,
        (0, _) => (2.0 * n * (n - 2.0)).ln() + ln_pow,
        (_, 1) => ln_pow - (bessel::power_beta_exp_scaled(spec.n, r).ln() - r),
        _ => (2.0 * n).ln() + ln_pow - (bessel::power_beta_exp_scaled(spec.n - 2, r).ln() - r),
    }
}

/// `r^{n−1}/Q(r) = r^n φ(0, r)`, the weight turning `|ω_0|` into the majorant density.
pub fn volume_over_q(spec: &KernelSpec, r: f64) -> f64 {
    let n = spec.n as f64;
    match (spec.sigma, spec.k) {
        (0, 1) => 1.0 / n,
        (0, _) => r * r / (2.0 * n * (n - 2.0)),
        (_, 1) => bessel::power_beta_exp_scaled(spec.n, r) * (-r).exp(),
        _ => r * r * bessel::power_beta_exp_scaled(spec.n - 2, r) * (-r).exp() / (2.0 * n),
    }
}

/// The criterion function
/// `S(r) = [r ∂_1φ(r,r) φ(0,r) − r φ(r,r) ∂_2φ(0,r)] / φ(0,r)²`, with `S(0)` the
/// closed-form limit.
pub fn s_criterion(spec: &KernelSpec, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("S needs a finite r ≥ 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(spec.s_at_origin());
    }
    let a_r = spec.left_factors(r);
    let a_0 = spec.left_factors(0.0);
    let b_r = spec.right_factors(r);
    let mut phi_rr = 0.0;
    let mut d1_rr = 0.0;
    let mut phi_0r = 0.0;
    let mut d2_0r = 0.0;
    for j in 0..a_r.len {
        phi_rr += a_r.v[j] * b_r.v[j];
        d1_rr += a_r.d[j] * b_r.v[j];
        phi_0r += a_0.v[j] * b_r.v[j];
        d2_0r += a_0.v[j] * b_r.d[j];
    }
    // φ(0,r) carries e^{−σr}; the ratio therefore gains e^{σr}.
    let scale = (spec.lambda() * r).exp();
    Ok(scale * r * (d1_rr * phi_0r - phi_rr * d2_0r) / (phi_0r * phi_0r))
}

/// `λ_a(r) = α_{n−2}(r)/α_n(r)` (n ≥ 3).
pub fn ratio_a(n: u32, r: f64) -> f64 {
    let nf = n as f64;
    1.0 + r * r * bessel::alpha_exp_scaled(n + 2, r) / (nf * (nf + 2.0) * bessel::alpha_exp_scaled(n, r))
}

/// `λ_b(r) = β_{n−2}(r)/(n² β_n(r))` (n ≥ 3, r > 0).
pub fn ratio_b(n: u32, r: f64) -> f64 {
    let nf = n as f64;
    let (bm, b) = bessel::beta_pair_exp_scaled(n - 2, r);
    bm / (nf * nf * b)
}

/// Closed form of `S` for `(σ = 1, k = 2)`:
/// `S = j/(n λ_b²) [λ_b² + λ_b − r²/n²]` with `j = n r² α_{n+2}/(n+2)`.
pub fn s_full_second_order_closed_form(n: u32, r: f64) -> f64 {
    if r == 0.0 {
        let nf = n as f64;
        return 2.0 * (nf - 2.0) / (nf + 2.0);
    }
    let nf = n as f64;
    let j = nf * r * r * bessel::alpha(n + 2, r) / (nf + 2.0);
    let lb = ratio_b(n, r);
    j / (nf * lb * lb) * (lb * lb + lb - r * r / (nf * nf))
}
