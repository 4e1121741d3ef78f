//! Green kernels: closed forms, structural conditions and the operator roundtrip.

use epdiff_core::bessel::{alpha, beta, beta_scaled};
use epdiff_core::kernel::{
    apply_operator, d1_delta, d2_delta, delta, invert_operator, log_phi_mixed_partial, phi, q_weight, ratio_a, ratio_b,
    s_criterion, s_full_second_order_closed_form, volume_over_q,
};
use epdiff_core::{KernelPoint, KernelSpec, RadialGrid};
use proptest::prelude::*;

fn spec(sigma: u8, k: u8, n: u32) -> KernelSpec {
    KernelSpec::new(sigma, k, n).unwrap()
}

fn pt(r: f64, s: f64) -> KernelPoint {
    KernelPoint::new(r, s).unwrap()
}

fn all_specs() -> Vec<KernelSpec> {
    let mut v = Vec::new();
    for n in 1..=5 {
        v.push(spec(0, 1, n));
        v.push(spec(1, 1, n));
    }
    for n in 3..=5 {
        v.push(spec(0, 2, n));
        v.push(spec(1, 2, n));
    }
    v
}

/// Smooth bump supported on `(a, b)` with peak value 1.
fn bump(r: f64, a: f64, b: f64) -> f64 {
    let x = (2.0 * r - a - b) / (b - a);
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

#[test]
fn phi_examples() {
    assert!((phi(&spec(0, 1, 3), pt(1.0, 2.0)) - 1.0 / 24.0).abs() < 1e-15);
    assert!((phi(&spec(0, 2, 3), pt(1.0, 2.0)) - 19.0 / 240.0).abs() < 1e-15);
    let ch = 1f64.sinh() * (-2f64).exp() / 2.0;
    assert!((phi(&spec(1, 1, 1), pt(1.0, 2.0)) - ch).abs() < 1e-15);
}

#[test]
fn delta_examples() {
    for n in 1..=5u32 {
        let s = spec(0, 1, n);
        let nf = n as f64;
        let (r, t) = (0.8, 2.3);
        assert!((delta(&s, pt(r, t)) - r * t.powf(1.0 - nf) / nf).abs() < 1e-15);
        assert!((d2_delta(&s, pt(r, t)) - (1.0 - nf) / nf * r * t.powf(-nf)).abs() < 1e-15);
    }
    // Ḣ², n = 3: δ = r/6 − r³/(30 s²), so ∂_1δ(1,1) = 1/6 − 1/10.
    let s = spec(0, 2, 3);
    assert!((delta(&s, pt(1.0, 2.0)) - (1.0 / 6.0 - 1.0 / 120.0)).abs() < 1e-15);
    assert!((d1_delta(&s, pt(1.0, 1.0)) - 1.0 / 15.0).abs() < 1e-15);
}

/// The three-term `(σ = 1, k = 2)` kernel evaluated literally.
fn phi_h2_literal(n: u32, r: f64, s: f64) -> f64 {
    let nf = n as f64;
    0.5 * (nf * alpha(n, r) * beta(n, s).unwrap() + alpha(n, r) * beta(n - 2, s).unwrap() / nf
        - nf * alpha(n - 2, r) * beta(n, s).unwrap())
}

#[test]
fn full_second_order_kernel_matches_three_term_form() {
    for n in 3..=5 {
        let sp = spec(1, 2, n);
        for &(r, s) in &[(0.0, 0.5), (0.3, 0.3), (0.5, 2.0), (2.0, 6.0), (5.0, 5.5)] {
            let lit = phi_h2_literal(n, r, s);
            let ours = phi(&sp, pt(r, s));
            assert!((ours - lit).abs() < 1e-11 * lit.abs(), "n={n} ({r},{s}): {ours} vs {lit}");
        }
    }
}

#[test]
fn first_derivatives_match_finite_differences() {
    for sp in all_specs() {
        for &(r, s) in &[(0.4, 1.3), (1.0, 2.0), (3.0, 3.5), (0.2, 7.0)] {
            let h = 1e-5;
            let fd1 = (delta(&sp, pt(r + h, s)) - delta(&sp, pt(r - h, s))) / (2.0 * h);
            let fd2 = (delta(&sp, pt(r, s + h)) - delta(&sp, pt(r, s - h))) / (2.0 * h);
            let d1 = d1_delta(&sp, pt(r, s));
            let d2 = d2_delta(&sp, pt(r, s));
            assert!((d1 - fd1).abs() < 1e-7 * (1.0 + d1.abs()), "{sp} d1 ({r},{s})");
            assert!((d2 - fd2).abs() < 1e-7 * (1.0 + d2.abs()), "{sp} d2 ({r},{s})");
        }
    }
}

#[test]
fn q_weight_closed_forms() {
    for n in 1..=5u32 {
        let nf = n as f64;
        for &r in &[0.0, 0.3, 2.0, 9.0] {
            let q = q_weight(&spec(0, 1, n), r).unwrap();
            let expect = nf * r.powi(n as i32 - 1);
            assert!((q - expect).abs() < 1e-13 * expect.max(1.0), "n={n} r={r}");
            if r > 0.0 {
                let q = q_weight(&spec(1, 1, n), r).unwrap();
                let expect = r.powi(n as i32 - 1) / beta_scaled(n, r).unwrap();
                assert!((q - expect).abs() < 1e-12 * expect);
                // Generic definition 1/(r φ(0, r)).
                let generic = 1.0 / (r * phi(&spec(1, 1, n), pt(0.0, r)));
                assert!((q - generic).abs() < 1e-12 * q);
            }
        }
    }
    assert!((q_weight(&spec(0, 2, 3), 4.2).unwrap() - 6.0).abs() < 1e-14);
    for &r in &[0.0, 0.5, 3.0] {
        assert!((q_weight(&spec(1, 1, 1), r).unwrap() - r.exp()).abs() < 1e-13 * r.exp());
    }
    for n in 3..=5 {
        let sp = spec(1, 2, n);
        for &r in &[0.4, 3.0, 11.0] {
            let q = q_weight(&sp, r).unwrap();
            let expect = 2.0 * n as f64 * r.powi(n as i32 - 3) / beta_scaled(n - 2, r).unwrap();
            assert!((q - expect).abs() < 1e-12 * expect);
            let generic = 1.0 / (r * phi(&sp, pt(0.0, r)));
            assert!((q - generic).abs() < 1e-12 * q);
            let v = volume_over_q(&sp, r);
            assert!((v - r.powi(n as i32 - 1) / q).abs() < 1e-12 * v);
        }
    }
}

#[test]
fn s_criterion_closed_forms() {
    let mut r = 1e-3;
    while r <= 30.0 {
        for n in 1..=5u32 {
            let nf = n as f64;
            let s01 = s_criterion(&spec(0, 1, n), r).unwrap();
            assert!((s01 - nf).abs() < 1e-9 * nf, "(0,1,{n}) r={r}: {s01}");
            let s11 = s_criterion(&spec(1, 1, n), r).unwrap();
            let closed = 1.0 / beta_scaled(n, r).unwrap();
            assert!((s11 - closed).abs() < 1e-9 * closed, "(1,1,{n}) r={r}");
            if n >= 3 {
                let s02 = s_criterion(&spec(0, 2, n), r).unwrap();
                let c = 2.0 * (nf - 2.0) / (nf + 2.0);
                assert!((s02 - c).abs() < 1e-9 * c, "(0,2,{n}) r={r}: {s02}");
                let s12 = s_criterion(&spec(1, 2, n), r).unwrap();
                let closed = s_full_second_order_closed_form(n, r);
                assert!((s12 - closed).abs() < 1e-9 * closed, "(1,2,{n}) r={r}: {s12} vs {closed}");
            }
        }
        r *= 1.1;
    }
}

#[test]
fn s_limits_at_origin() {
    assert_eq!(s_criterion(&spec(0, 2, 3), 0.0).unwrap(), 0.4);
    assert_eq!(s_criterion(&spec(1, 1, 4), 0.0).unwrap(), 4.0);
    for n in 1..=5 {
        let near = s_criterion(&spec(1, 1, n), 1e-3).unwrap();
        assert!((near - n as f64).abs() < 2e-2 * n as f64);
    }
    for n in 3..=5 {
        let near = s_criterion(&spec(1, 2, n), 1e-3).unwrap();
        let lim = s_criterion(&spec(1, 2, n), 0.0).unwrap();
        // The approach to the limit is linear in r.
        assert!((near - lim).abs() < 1e-3, "n={n}: {near} vs {lim}");
    }
}

#[test]
fn homogeneous_second_order_mixed_partial_closed_form() {
    for n in 3..=5u32 {
        let nf = n as f64;
        let sp = spec(0, 2, n);
        for &(r, s) in &[(0.1, 0.2), (1.0, 3.0), (2.0, 2.0)] {
            let d = (nf + 2.0) * s * s - (nf - 2.0) * r * r;
            let expect = 4.0 * r * s * (nf * nf - 4.0) / (d * d);
            let got = log_phi_mixed_partial(&sp, pt(r, s));
            assert!((got - expect).abs() < 1e-12 * expect.abs().max(1.0), "n={n} ({r},{s})");
        }
    }
}

/// The log-supermodularity stencil with `h = min(1e−3, (s−r)/4)`. Rounding in
/// the four `ln φ` values contributes about `4 ε |ln φ| / h²`, which is the
/// tolerance used against the analytic mixed partial.
#[test]
fn mixed_difference_stencil_agrees_with_analytic_partial() {
    for sp in all_specs() {
        let mut worst: f64 = f64::INFINITY;
        for &(r, s) in &[(1e-3, 0.5), (0.05, 0.06), (0.5, 1.0), (2.0, 2.01), (4.0, 9.0), (10.0, 19.0)] {
            let h = (1e-3f64).min((s - r) / 4.0);
            let l = |a: f64, b: f64| phi(&sp, pt(a, b)).ln();
            let fd = (l(r + h, s + h) - l(r + h, s) - l(r, s + h) + l(r, s)) / (h * h);
            let an = log_phi_mixed_partial(&sp, pt(r + 0.5 * h, s + 0.5 * h));
            let roundoff = 8.0 * f64::EPSILON * l(r, s).abs().max(1.0) / (h * h);
            assert!((fd - an).abs() < roundoff + 1e-3 * an.abs() + 2.0 * h, "{sp} ({r},{s}): {fd} vs {an}");
            worst = worst.min(fd + roundoff);
        }
        assert!(worst >= -1e-9, "{sp}");
    }
}

#[test]
fn riccati_ratio_bounds() {
    for n in 3..=5u32 {
        let nf = n as f64;
        assert!((ratio_a(n, 0.0) - 1.0).abs() < 1e-15);
        let mut prev_a = ratio_a(n, 0.0);
        let mut prev_b = ratio_b(n, 1e-3);
        for i in 1..=500 {
            let r = 30.0 * i as f64 / 500.0;
            let root = (0.25 + r * r / (nf * nf)).sqrt();
            let la = ratio_a(n, r);
            let lb = ratio_b(n, r);
            assert!(la <= 0.5 + root, "λ_a n={n} r={r}");
            assert!(lb >= root - 0.5, "λ_b n={n} r={r}");
            assert!(la >= prev_a && lb >= prev_b, "monotone n={n} r={r}");
            prev_a = la;
            prev_b = lb;
        }
    }
}

fn roundtrip_error(sp: &KernelSpec, grid: &RadialGrid, a: f64, b: f64) -> f64 {
    let omega: Vec<f64> = grid.nodes().iter().map(|&r| -bump(r, a, b)).collect();
    let inv = invert_operator(sp, grid, &omega).unwrap();
    assert!(inv.warning.is_none());
    let back = apply_operator(sp, grid, &inv.u).unwrap();
    let scale = omega.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    back.iter().zip(&omega).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

const ROUNDTRIP_SPECS: [(u8, u8, u32); 6] = [(0, 1, 1), (0, 1, 3), (1, 1, 1), (1, 1, 3), (0, 2, 3), (1, 2, 3)];

#[test]
fn operator_roundtrip_narrow_bump_fine_grid() {
    let grid = RadialGrid::uniform(4096, 20.0, 12.0).unwrap();
    for (s, k, n) in ROUNDTRIP_SPECS {
        let sp = spec(s, k, n);
        let err = roundtrip_error(&sp, &grid, 0.3, 1.3);
        assert!(err < 1e-6, "{sp}: {err}");
    }
}

/// Wide bumps give large `u` for the second-order operators, and the roundtrip
/// then measures rounding noise amplified by `h⁻⁴`; only first-order specs are
/// held to the tight tolerance here.
#[test]
fn operator_roundtrip_wide_bump_first_order() {
    let grid = RadialGrid::uniform(2048, 20.0, 12.0).unwrap();
    for (s, k, n) in ROUNDTRIP_SPECS.into_iter().filter(|t| t.1 == 1) {
        let sp = spec(s, k, n);
        let err = roundtrip_error(&sp, &grid, 2.0, 10.0);
        assert!(err < 1e-6, "{sp}: {err}");
    }
}

#[test]
fn first_order_one_dimensional_inversion_is_an_antiderivative() {
    // For (σ=0, k=1, n=1): u' = ∫_r^R ω.
    let grid = RadialGrid::uniform(4001, 10.0, 6.0).unwrap();
    let sp = spec(0, 1, 1);
    let omega: Vec<f64> = grid.nodes().iter().map(|&r| -bump(r, 1.0, 4.0)).collect();
    let u = invert_operator(&sp, &grid, &omega).unwrap().u;
    let tail = grid.tail_integrals(&omega);
    let h = grid.step(0);
    for i in (100..3900).step_by(37) {
        let du = (u[i + 1] - u[i - 1]) / (2.0 * h);
        assert!((du - tail[i]).abs() < 1e-5, "i={i}: {du} vs {}", tail[i]);
    }
}

#[test]
fn apply_operator_symbolic_and_harmonic_checks() {
    let grid = RadialGrid::uniform(2001, 8.0, 4.0).unwrap();
    let r = grid.nodes();
    // n = 1, σ = 1, k = 1, u = r e^{−r²}: ω = u − u'' = r e^{−r²}(1 + 6 − 4r²).
    let u: Vec<f64> = r.iter().map(|&x| x * (-x * x).exp()).collect();
    let om = apply_operator(&spec(1, 1, 1), &grid, &u).unwrap();
    for i in 0..r.len() {
        let x = r[i];
        let expect = x * (-x * x).exp() * (7.0 - 4.0 * x * x);
        assert!((om[i] - expect).abs() < 1e-8, "r={x}");
    }
    // u = r is harmonic for the vector Laplacian in any dimension.
    let lin: Vec<f64> = r.to_vec();
    for n in 1..=4 {
        let om = apply_operator(&spec(1, 1, n), &grid, &lin).unwrap();
        for i in 1..r.len() {
            assert!((om[i] - r[i]).abs() < 1e-9 * (1.0 + r[i]), "n={n} r={}", r[i]);
        }
        let om0 = apply_operator(&spec(0, 1, n), &grid, &lin).unwrap();
        assert!(om0.iter().all(|v| v.abs() < 1e-8));
    }
}

#[test]
fn quadrature_warning_for_oscillatory_momentum() {
    let grid = RadialGrid::uniform(512, 10.0, 6.0).unwrap();
    let h = grid.step(0);
    let omega: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| if (1.0..5.0).contains(&r) { (std::f64::consts::PI * r / (3.0 * h)).sin() } else { 0.0 })
        .collect();
    let inv = invert_operator(&spec(0, 1, 3), &grid, &omega).unwrap();
    assert!(inv.warning.is_some());
}

proptest! {
    #[test]
    fn kernel_positive_on_domain(idx in 0usize..16, r in 0.0f64..25.0, ds in 1e-6f64..25.0) {
        let sp = all_specs()[idx];
        let s = r + ds;
        prop_assert!(phi(&sp, pt(r, s)) > 0.0);
        prop_assert!(delta(&sp, pt(r, s)) >= 0.0);
    }

    #[test]
    fn log_supermodular_on_domain(idx in 0usize..16, r in 1e-3f64..25.0, ds in 0.0f64..25.0) {
        let sp = all_specs()[idx];
        prop_assert!(log_phi_mixed_partial(&sp, pt(r, r + ds)) >= -1e-9);
    }

    #[test]
    fn inversion_is_linear(c in -3.0f64..3.0) {
        let grid = RadialGrid::uniform(256, 10.0, 6.0).unwrap();
        let sp = spec(1, 2, 3);
        let w1: Vec<f64> = grid.nodes().iter().map(|&r| bump(r, 1.0, 4.0)).collect();
        let w2: Vec<f64> = grid.nodes().iter().map(|&r| bump(r, 2.0, 5.0)).collect();
        let mix: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + c * b).collect();
        let u1 = invert_operator(&sp, &grid, &w1).unwrap().u;
        let u2 = invert_operator(&sp, &grid, &w2).unwrap().u;
        let um = invert_operator(&sp, &grid, &mix).unwrap().u;
        for i in 0..256 {
            prop_assert!((um[i] - u1[i] - c * u2[i]).abs() < 1e-12);
        }
        let a1 = apply_operator(&sp, &grid, &u1).unwrap();
        let am = apply_operator(&sp, &grid, &um).unwrap();
        let a2 = apply_operator(&sp, &grid, &u2).unwrap();
        // Linear up to rounding in u, amplified by the fourth-order stencil.
        let h = grid.step(0);
        let umax = um.iter().chain(&u1).chain(&u2).fold(0.0f64, |m, v| m.max(v.abs()));
        let noise = 64.0 * f64::EPSILON * (1.0 + c.abs()) * umax * 36.0 / h.powi(4);
        for i in 0..256 {
            prop_assert!((am[i] - a1[i] - c * a2[i]).abs() < noise);
        }
    }
}
