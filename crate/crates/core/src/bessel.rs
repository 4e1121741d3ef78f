//! Normalized modified Bessel functions.
//!
//! For an integer order `p ≥ 0` (so that `ν = p/2` is an integer or a half
//! integer) this module evaluates
//!
//! ```text
//! α_p(r) = c_p r^{-ν} I_ν(r),   β_p(r) = r^{-ν} K_ν(r) / c_p,   c_p = 2^ν Γ(ν + 1),
//! ```
//!
//! normalized so that `α_p(0) = 1` and `r^p β_p(r) → 1/p` as `r → 0`.
//!
//! `α_p` is summed from its `0F1` power series up to [`series_limit`] and from
//! the Hankel expansion beyond. `K_ν` uses the terminating closed form for
//! half-integer `ν`; for integer `ν` it uses the small-argument series of
//! `K_0, K_1` (x ≤ 2) or Steed's continued fraction (x > 2), followed by upward
//! recurrence. Every function has an exponentially scaled companion
//! (`e^{-r} α_p`, `e^{r} β_p`) so kernels can form products without overflow.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Radius at which `α_p` switches from the power series to the Hankel expansion.
pub fn series_limit(p: u32) -> f64 {
    20.0 + p as f64
}

/// `c_p = 2^{p/2} Γ(p/2 + 1)`, exact up to rounding for integer `p`.
pub fn normalization(p: u32) -> f64 {
    // Γ(p/2 + 1) by upward products from Γ(1) = 1 or Γ(3/2) = √π/2.
    let (mut gamma, mut x) = if p.is_multiple_of(2) { (1.0, 1.0) } else { (0.5 * PI.sqrt(), 1.5) };
    let target = 0.5 * p as f64 + 1.0;
    while x < target - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    2f64.powf(0.5 * p as f64) * gamma
}

/// `α_p(r)`. The function is even in `r`, so negative radii are reflected.
pub fn alpha(p: u32, r: f64) -> f64 {
    let r = r.abs();
    if r <= series_limit(p) {
        alpha_series(p, r)
    } else {
        alpha_hankel_scaled(p, r) * r.exp()
    }
}

/// `e^{-r} α_p(r)`.
pub fn alpha_exp_scaled(p: u32, r: f64) -> f64 {
    let r = r.abs();
    if r <= series_limit(p) {
        alpha_series(p, r) * (-r).exp()
    } else {
        alpha_hankel_scaled(p, r)
    }
}

/// `α_p'(r) = r α_{p+2}(r) / (p + 2)`.
pub fn alpha_prime(p: u32, r: f64) -> f64 {
    r * alpha(p + 2, r) / (p as f64 + 2.0)
}

/// `β_p(r)` for `r > 0`.
pub fn beta(p: u32, r: f64) -> Result<f64> {
    check_positive(p, r)?;
    Ok(beta_exp_scaled_unchecked(p, r) * (-r).exp())
}

/// `e^{r} β_p(r)` for `r > 0`.
pub fn beta_exp_scaled(p: u32, r: f64) -> Result<f64> {
    check_positive(p, r)?;
    Ok(beta_exp_scaled_unchecked(p, r))
}

/// `β_p'(r) = −(p + 2) r β_{p+2}(r)` for `r > 0`.
pub fn beta_prime(p: u32, r: f64) -> Result<f64> {
    check_positive(p, r)?;
    Ok(-(p as f64 + 2.0) * r * beta_exp_scaled_unchecked(p + 2, r) * (-r).exp())
}

/// `r^p β_p(r)`, extended by `1/p` at `r = 0`.
pub fn beta_scaled(p: u32, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 || (p == 0 && r == 0.0) {
        return Err(Error::Domain(format!("r^p β_p(r) needs r ≥ 0 (and r > 0 for p = 0), got p = {p}, r = {r}")));
    }
    Ok(power_beta_exp_scaled(p, r) * (-r).exp())
}

/// `e^{r} r^p β_p(r)`, extended by `1/p` at `r = 0` (p > 0).
pub fn beta_scaled_exp(p: u32, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 || (p == 0 && r == 0.0) {
        return Err(Error::Domain(format!("r^p β_p(r) needs r ≥ 0 (and r > 0 for p = 0), got p = {p}, r = {r}")));
    }
    Ok(power_beta_exp_scaled(p, r))
}

/// Residual of the Wronskian identity `β_p α_p' − α_p β_p' = r^{-p-1}`.
pub fn wronskian_residual(p: u32, r: f64) -> Result<f64> {
    check_positive(p, r)?;
    let pf = p as f64;
    // Work with the scaled pieces; the exponentials cancel in each product.
    let a = alpha_exp_scaled(p, r);
    let a2 = alpha_exp_scaled(p + 2, r);
    let (b, b2) = beta_pair_exp_scaled(p, r);
    let w = b * r * a2 / (pf + 2.0) + a * (pf + 2.0) * r * b2;
    Ok(w - r.powi(-(p as i32) - 1))
}

fn check_positive(p: u32, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("β_{p} needs a finite r > 0, got {r}")))
    }
}

/// Power series `Σ (r²/4)^k / (k! (ν+1)_k)`.
pub(crate) fn alpha_series(p: u32, r: f64) -> f64 {
    let nu = 0.5 * p as f64;
    let y = 0.25 * r * r;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= y / (k * (nu + k));
        sum += term;
        k += 1.0;
    }
    sum
}

/// Hankel expansion of `e^{-r} α_p(r)`, accurate for large `r`.
pub(crate) fn alpha_hankel_scaled(p: u32, r: f64) -> f64 {
    let nu = 0.5 * p as f64;
    let mu = 4.0 * nu * nu;
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * r);
        if next.abs() > term.abs() || next == 0.0 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    normalization(p) * r.powf(-nu) * sum / (2.0 * PI * r).sqrt()
}

/// `e^{r} β_p(r)` without argument checks (r > 0).
pub(crate) fn beta_exp_scaled_unchecked(p: u32, r: f64) -> f64 {
    let (k, _) = k_pair_exp_scaled(p, r);
    k * r.powf(-0.5 * p as f64) / normalization(p)
}

/// `(e^{r} β_p(r), e^{r} β_{p+2}(r))` from a single `K` evaluation.
pub(crate) fn beta_pair_exp_scaled(p: u32, r: f64) -> (f64, f64) {
    let (k0, k1) = k_pair_exp_scaled(p, r);
    let nu = 0.5 * p as f64;
    (k0 * r.powf(-nu) / normalization(p), k1 * r.powf(-nu - 1.0) / normalization(p + 2))
}

/// `e^{r} r^p β_p(r)` including the `r = 0` limit.
pub(crate) fn power_beta_exp_scaled(p: u32, r: f64) -> f64 {
    if r < 1e-20 && p > 0 {
        return 1.0 / p as f64;
    }
    let (k, _) = k_pair_exp_scaled(p, r);
    k * r.powf(0.5 * p as f64) / normalization(p)
}

/// `(e^{r} r^p β_p(r), e^{r} r^{p+2} β_{p+2}(r))`, with the `r = 0` limits.
pub(crate) fn power_beta_pair_exp_scaled(p: u32, r: f64) -> (f64, f64) {
    if r < 1e-20 && p > 0 {
        return (1.0 / p as f64, 1.0 / (p as f64 + 2.0));
    }
    let (k0, k1) = k_pair_exp_scaled(p, r);
    let nu = 0.5 * p as f64;
    (k0 * r.powf(nu) / normalization(p), k1 * r.powf(nu + 1.0) / normalization(p + 2))
}

/// `(e^x K_ν(x), e^x K_{ν+1}(x))` with `ν = p/2`, `x > 0`.
pub(crate) fn k_pair_exp_scaled(p: u32, x: f64) -> (f64, f64) {
    if p % 2 == 1 {
        let m = (p - 1) / 2;
        (k_half_exp_scaled(m, x), k_half_exp_scaled(m + 1, x))
    } else {
        let nu = p / 2;
        let (mut km, mut k) = k01_exp_scaled(x);
        for j in 1..=nu {
            let next = km + 2.0 * j as f64 / x * k;
            km = k;
            k = next;
        }
        (km, k)
    }
}

/// `e^x K_{m+1/2}(x)` from the terminating closed form.
fn k_half_exp_scaled(m: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=m {
        let kf = k as f64;
        term *= (m as f64 + kf) * (m as f64 - kf + 1.0) / (kf * 2.0 * x);
        sum += term;
    }
    (PI / (2.0 * x)).sqrt() * sum
}

/// `(e^x K_0(x), e^x K_1(x))`.
fn k01_exp_scaled(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_steed(x)
    }
}

/// Small-argument series for `K_0` and `K_1`.
fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();
    // I_0, I_1 and the digamma-weighted companion sums.
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut t0 = 1.0; // y^k / (k!)^2
    let mut t1 = 1.0; // y^k / (k! (k+1)!)
    let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
    let mut k = 0.0;
    loop {
        let psi_k2 = psi_k1 + 1.0 / (k + 1.0); // ψ(k+2)
        i0 += t0;
        i1 += t1;
        s0 += psi_k1 * t0;
        s1 += (psi_k1 + psi_k2) * t1;
        k += 1.0;
        t0 *= y / (k * k);
        t1 *= y / (k * (k + 1.0));
        psi_k1 = psi_k2;
        if t0 < 1e-18 * i0 && t1 < 1e-18 * i1 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -log_half * i0 + s0;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * s1;
    (k0, k1)
}

/// Steed's continued fraction for `e^x K_0(x)`, `e^x K_1(x)` (x > 2).
fn k01_steed(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
