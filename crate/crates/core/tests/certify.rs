//! Blowup certificate: sampled kernel conditions, constants and the majorant.

use epdiff_core::certify::{certify, DOMINANCE_TOL};
use epdiff_core::kernel::{q_weight, KernelSpec};
use epdiff_core::solver::{FlowState, InitialData, LagrangianSolver, RunOptions, TrajectoryRow};
use epdiff_core::RadialGrid;
use proptest::prelude::*;

fn bump(r: f64, a: f64, b: f64) -> f64 {
    let x = (2.0 * r - a - b) / (b - a);
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

fn grid() -> RadialGrid {
    RadialGrid::uniform(512, 20.0, 3.0).unwrap()
}

fn neg_bump(grid: &RadialGrid) -> Vec<f64> {
    grid.nodes().iter().map(|&r| -bump(r, 1.0, 3.0)).collect()
}

fn in_scope() -> Vec<KernelSpec> {
    let mut v = Vec::new();
    for n in 1..=5 {
        v.push(KernelSpec::new(0, 1, n).unwrap());
        v.push(KernelSpec::new(1, 1, n).unwrap());
    }
    for n in 3..=5 {
        v.push(KernelSpec::new(0, 2, n).unwrap());
        v.push(KernelSpec::new(1, 2, n).unwrap());
    }
    v
}

#[test]
fn every_in_scope_kernel_is_certified() {
    let g = grid();
    let w = neg_bump(&g);
    for spec in in_scope() {
        let cert = certify(&spec, &g, &w);
        assert!(cert.passed(), "{spec}:\n{}", cert.report());
        assert!(cert.c > 0.0 && cert.t_bound.is_finite() && cert.t_bound > 0.0);
    }
}

#[test]
fn homogeneous_constants_match_closed_forms() {
    let g = grid();
    let w = neg_bump(&g);
    for n in 1..=5u32 {
        let cert = certify(&KernelSpec::new(0, 1, n).unwrap(), &g, &w);
        assert!((cert.c - n as f64).abs() < 1e-6, "n = {n}: C = {}", cert.c);
    }
    for n in 3..=5u32 {
        let cert = certify(&KernelSpec::new(0, 2, n).unwrap(), &g, &w);
        let expected = 2.0 * (n as f64 - 2.0) / (n as f64 + 2.0);
        assert!((cert.c - expected).abs() < 1e-6, "n = {n}: C = {}", cert.c);
    }
}

#[test]
fn second_order_three_dimensional_weight_is_constant() {
    let g = grid();
    let cert = certify(&KernelSpec::new(0, 2, 3).unwrap(), &g, &neg_bump(&g));
    assert!(cert.q.iter().all(|&q| (q - 6.0).abs() < 1e-12));
    // q̃ = (1 − (t/30) ∫_r |z_0|)² with C = 2/5 and Q = 6.
    let z_abs: Vec<f64> = g.nodes().iter().map(|&r| r * r * bump(r, 1.0, 3.0)).collect();
    let tail = g.tail_integrals(&z_abs);
    let t = 0.3 * cert.t_bound;
    for i in (0..g.len()).step_by(37) {
        let expected = (1.0 - t / 30.0 * tail[i]).powi(2);
        assert!((cert.majorant(t, i) - expected).abs() < 1e-8);
    }
}

#[test]
fn majorant_vanishes_at_the_bound_at_the_origin() {
    let g = grid();
    let cert = certify(&KernelSpec::new(1, 2, 4).unwrap(), &g, &neg_bump(&g));
    assert!(cert.majorant(cert.t_bound, 0).abs() < 1e-24);
    assert!(cert.majorant_tail.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn weight_matches_first_order_homogeneous_form() {
    let spec = KernelSpec::new(0, 1, 3).unwrap();
    for &r in &[0.1, 1.0, 7.5] {
        assert!((q_weight(&spec, r).unwrap() - 3.0 * r * r).abs() < 1e-12 * r * r);
    }
}

#[test]
fn monitored_quantity_is_one_at_the_identity() {
    let g = grid();
    for spec in in_scope() {
        let cert = certify(&spec, &g, &neg_bump(&g));
        let st = FlowState::identity(&g);
        assert!(cert.monitored_quantity(&st).iter().all(|&q| (q - 1.0).abs() < 1e-14), "{spec}");
        assert!(cert.margin(&st).abs() < 1e-14);
    }
}

#[test]
fn camassa_holm_monitored_quantity() {
    // σ = 1, k = 1, n = 1: q = e^{γ − r} ρ.
    let g = grid();
    let spec = KernelSpec::new(1, 1, 1).unwrap();
    let cert = certify(&spec, &g, &neg_bump(&g));
    let mut st = FlowState::identity(&g);
    for (i, (gm, lr)) in st.gamma.iter_mut().zip(st.ln_rho.iter_mut()).enumerate() {
        *gm *= 1.01;
        *lr = -0.001 * i as f64 / 512.0;
    }
    let q = cert.monitored_quantity(&st);
    for (i, &r) in g.nodes().iter().enumerate() {
        let expected = (st.gamma[i] - r + st.ln_rho[i]).exp();
        assert!((q[i] - expected).abs() < 1e-12 * expected);
    }
}

#[test]
fn dominance_report_flags_missing_and_negative_margins() {
    let g = grid();
    let cert = certify(&KernelSpec::new(0, 1, 3).unwrap(), &g, &neg_bump(&g));
    let row = |t: f64, margin: Option<f64>| TrajectoryRow { t, min_rho: 1.0, argmin_r: 0.0, energy: 1.0, margin };
    let good = [row(0.0, Some(0.0)), row(0.1, Some(-1e-6))];
    assert!(cert.check_dominance(&good).passed);
    let bad = [row(0.0, Some(0.0)), row(0.1, Some(-2.0 * DOMINANCE_TOL))];
    let rep = cert.check_dominance(&bad);
    assert!(!rep.passed && rep.worst_time == 0.1);
    assert!(!cert.check_dominance(&[row(0.0, None)]).passed);
}

#[test]
fn margin_stays_nonnegative_along_a_run() {
    let g = RadialGrid::uniform(256, 20.0, 3.0).unwrap();
    let spec = KernelSpec::new(1, 1, 2).unwrap();
    let cert = certify(&spec, &g, &neg_bump(&g));
    let data = InitialData::new(&spec, &g, neg_bump(&g)).unwrap();
    let solver = LagrangianSolver::new(spec, &g, &data).unwrap();
    let mut monitor = |s: &FlowState| cert.margin(s);
    let res =
        solver.run(&RunOptions { dt: 1e-2, horizon: 0.5 * cert.t_bound, epsilon: 0.05 }, Some(&mut monitor)).unwrap();
    let rep = cert.check_dominance(&res.rows);
    assert!(rep.passed, "worst margin {}", rep.worst_margin);
    assert_eq!(rep.initial_margin, Some(0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bound_scales_inversely_with_amplitude(amp in 0.1f64..10.0, idx in 0usize..16) {
        let g = RadialGrid::uniform(256, 20.0, 3.0).unwrap();
        let spec = in_scope()[idx];
        let w1 = neg_bump(&g);
        let wa: Vec<f64> = w1.iter().map(|v| amp * v).collect();
        let t1 = certify(&spec, &g, &w1).t_bound;
        let ta = certify(&spec, &g, &wa).t_bound;
        prop_assert!((ta * amp / t1 - 1.0).abs() < 1e-12);
    }
}
