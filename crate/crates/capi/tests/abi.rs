//! In-process exercise of the exported C surface: the `extern "C"` functions
//! are called exactly as a C client would, including error retrieval and
//! null-pointer handling.

use std::ffi::{CStr, CString};
use std::ptr;

use rdlab_capi::*;

fn cfg(json: &str) -> CString {
    CString::new(json).expect("no interior NUL")
}

fn last_error() -> Option<String> {
    let ptr = rdlab_last_error_message();
    if ptr.is_null() {
        return None;
    }
    let msg = unsafe { CStr::from_ptr(ptr) }.to_string_lossy().into_owned();
    unsafe { rdlab_string_free(ptr) };
    Some(msg)
}

const HYPERBOLIC_BUMP: &str = r#"{
    "geometry": {"kind": "hyperbolic", "dim": 3, "kappa": 1.0},
    "m": 2.0, "p": 1.5,
    "reaction": false,
    "r_outer": 6.0, "cells": 200,
    "datum": {"kind": "bump", "center": 1.5, "width": 0.8, "height": 3.0}
}"#;

#[test]
fn version_is_a_static_semver_string() {
    let v = rdlab_version();
    assert!(!v.is_null());
    let text = unsafe { CStr::from_ptr(v) }.to_str().expect("UTF-8");
    assert_eq!(text, env!("CARGO_PKG_VERSION"));
    assert_eq!(text.split('.').count(), 3);
}

#[test]
fn simulation_lifecycle_runs_diffusion_and_reports_norms() {
    let json = cfg(HYPERBOLIC_BUMP);
    let sim = unsafe { rdlab_sim_new(json.as_ptr()) };
    assert!(!sim.is_null(), "error: {:?}", last_error());

    let n = unsafe { rdlab_sim_cells(sim) };
    assert_eq!(n, 200);
    assert_eq!(unsafe { rdlab_sim_time(sim) }, 0.0);

    let mut radii = vec![0.0f64; n];
    assert_eq!(
        unsafe { rdlab_sim_radii(sim, radii.as_mut_ptr(), n) },
        RdlabStatus::Ok
    );
    assert!(radii.windows(2).all(|w| w[0] < w[1]));

    let mut sup0 = 0.0f64;
    assert_eq!(
        unsafe { rdlab_sim_norm(sim, f64::INFINITY, &mut sup0) },
        RdlabStatus::Ok
    );
    assert!((sup0 - 3.0).abs() < 0.15, "datum peak ~3, got {sup0}");

    assert_eq!(unsafe { rdlab_sim_advance(sim, 0.01) }, RdlabStatus::Ok);
    assert!((unsafe { rdlab_sim_time(sim) } - 0.01).abs() < 1e-12);
    assert_eq!(
        unsafe { rdlab_sim_advance_to(sim, 0.5, 0.01) },
        RdlabStatus::Ok
    );
    assert_eq!(unsafe { rdlab_sim_time(sim) }, 0.5);

    let mut profile = vec![0.0f64; n];
    assert_eq!(
        unsafe { rdlab_sim_profile(sim, profile.as_mut_ptr(), n) },
        RdlabStatus::Ok
    );
    assert!(profile.iter().all(|&u| u >= 0.0));

    // Pure diffusion with a zero boundary cannot raise the sup norm.
    let mut sup1 = 0.0f64;
    assert_eq!(
        unsafe { rdlab_sim_norm(sim, f64::INFINITY, &mut sup1) },
        RdlabStatus::Ok
    );
    assert!(sup1 <= sup0 && sup1 > 0.0);

    // And the weighted L2 norm agrees with a direct computation from the
    // copied-out profile against the core library.
    let mut l2 = 0.0f64;
    assert_eq!(
        unsafe { rdlab_sim_norm(sim, 2.0, &mut l2) },
        RdlabStatus::Ok
    );
    assert!(l2 > 0.0 && l2 < sup0 * 50.0);

    unsafe { rdlab_sim_free(sim) };
}

#[test]
fn invalid_configurations_yield_null_and_a_message() {
    // Broken JSON.
    let sim = unsafe { rdlab_sim_new(cfg("{ not json").as_ptr()) };
    assert!(sim.is_null());
    assert!(last_error().expect("message").contains("json"));

    // Exponents outside the admissible window.
    let sim = unsafe {
        rdlab_sim_new(
            cfg(r#"{
                "geometry": {"kind": "euclidean", "dim": 3},
                "m": 2.0, "p": 3.0,
                "r_outer": 5.0, "cells": 64,
                "datum": {"kind": "zero"}
            }"#)
            .as_ptr(),
        )
    };
    assert!(sim.is_null());
    assert!(last_error().expect("message").contains("p"));

    // Values datum with the wrong length.
    let sim = unsafe {
        rdlab_sim_new(
            cfg(r#"{
                "geometry": {"kind": "euclidean", "dim": 3},
                "m": 2.0, "p": 1.5,
                "r_outer": 5.0, "cells": 64,
                "datum": {"kind": "values", "values": [1.0, 2.0]}
            }"#)
            .as_ptr(),
        )
    };
    assert!(sim.is_null());

    // Null config pointer.
    let sim = unsafe { rdlab_sim_new(ptr::null()) };
    assert!(sim.is_null());
}

#[test]
fn misuse_returns_invalid_argument_without_crashing() {
    let json = cfg(HYPERBOLIC_BUMP);
    let sim = unsafe { rdlab_sim_new(json.as_ptr()) };
    assert!(!sim.is_null());

    assert_eq!(
        unsafe { rdlab_sim_advance(sim, -1.0) },
        RdlabStatus::InvalidArgument
    );
    assert!(last_error().is_some());

    assert_eq!(
        unsafe { rdlab_sim_advance_to(sim, -5.0, 0.1) },
        RdlabStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { rdlab_sim_advance_to(sim, 1.0, 0.0) },
        RdlabStatus::InvalidArgument
    );

    let mut buf = vec![0.0f64; 3];
    assert_eq!(
        unsafe { rdlab_sim_profile(sim, buf.as_mut_ptr(), 3) },
        RdlabStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { rdlab_sim_profile(sim, ptr::null_mut(), 200) },
        RdlabStatus::InvalidArgument
    );
    let mut out = 0.0f64;
    assert_eq!(
        unsafe { rdlab_sim_norm(sim, 0.5, &mut out) },
        RdlabStatus::InvalidArgument
    );

    // Null handles are inert.
    assert_eq!(
        unsafe { rdlab_sim_advance(ptr::null_mut(), 0.1) },
        RdlabStatus::InvalidArgument
    );
    assert!(unsafe { rdlab_sim_time(ptr::null()) }.is_nan());
    assert_eq!(unsafe { rdlab_sim_cells(ptr::null()) }, 0);
    unsafe { rdlab_sim_free(ptr::null_mut()) };
    unsafe { rdlab_string_free(ptr::null_mut()) };

    // A successful call clears the thread's error slot.
    assert_eq!(unsafe { rdlab_sim_advance(sim, 0.01) }, RdlabStatus::Ok);
    assert!(last_error().is_none());

    unsafe { rdlab_sim_free(sim) };
}

#[test]
fn poincare_matches_the_unit_ball_oracle() {
    let json = cfg(r#"{"geometry": {"kind": "euclidean", "dim": 3}}"#);
    let mut lambda = 0.0f64;
    let mut c_p = 0.0f64;
    let status = unsafe { rdlab_poincare(json.as_ptr(), 1.0, 400, &mut lambda, &mut c_p) };
    assert_eq!(status, RdlabStatus::Ok, "error: {:?}", last_error());
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((lambda - pi2).abs() / pi2 < 0.02);
    assert!((c_p - lambda.sqrt()).abs() < 1e-12);

    // Out pointers are individually optional.
    let status = unsafe { rdlab_poincare(json.as_ptr(), 1.0, 400, &mut lambda, ptr::null_mut()) };
    assert_eq!(status, RdlabStatus::Ok);

    // Too few cells is a validation error.
    let status = unsafe { rdlab_poincare(json.as_ptr(), 1.0, 8, &mut lambda, &mut c_p) };
    assert_eq!(status, RdlabStatus::InvalidArgument);
}

#[test]
fn pure_evaluators_agree_with_the_core_library() {
    let (m, p, q, c_p) = (2.0, 1.5, 2.0, 1.048188);
    let mut out = 0.0f64;
    assert_eq!(
        unsafe { rdlab_cq_constant(q, m, p, c_p, &mut out) },
        RdlabStatus::Ok
    );
    let expect = rdlab::estimates::cq_constant(q, m, p, c_p).unwrap();
    assert_eq!(out, expect);

    assert_eq!(
        unsafe { rdlab_smoothing_bound(0.5, 1.7, m, p, 3, 2.0, 0.3, &mut out) },
        RdlabStatus::Ok
    );
    let expect = rdlab::estimates::smoothing_bound(0.5, 1.7, m, p, 3, 2.0, 0.3).unwrap();
    assert_eq!(out, expect);
    assert_eq!(
        unsafe { rdlab_smoothing_bound(0.0, 1.7, m, p, 3, 2.0, 0.3, &mut out) },
        RdlabStatus::InvalidArgument,
        "the smoothing bound requires t > 0"
    );

    // Barrier evaluators against the core closed forms, including a point
    // outside the support (must be exactly zero).
    let (c0, a, alpha, t0) = (0.5, 0.2411239090754621, 0.3, 16.0);
    use rdlab::barriers::{BarrierParams, BarrierTarget};
    let bp_w =
        BarrierParams::with_beta_rule(c0, a, alpha, t0, m, BarrierTarget::WeightedEuclidean);
    for &(r, t) in &[(0.0, 0.0), (1.7, 3.0), (250.0, 1.0)] {
        assert_eq!(
            unsafe { rdlab_subsolution_eval(r, t, c0, a, alpha, t0, m, &mut out) },
            RdlabStatus::Ok
        );
        assert_eq!(out, rdlab::barriers::subsolution_eval(r, t, &bp_w, m));
    }
    let (c0, a, alpha, t0) = (0.1, 0.4, 0.5, 16.0);
    let bp_m = BarrierParams::with_beta_rule(c0, a, alpha, t0, m, BarrierTarget::Manifold);
    for &(r, t) in &[(0.0, 0.0), (2.5, 40.0), (19.0, 100.0)] {
        assert_eq!(
            unsafe { rdlab_manifold_barrier_eval(r, t, c0, a, alpha, t0, m, &mut out) },
            RdlabStatus::Ok
        );
        assert_eq!(out, rdlab::barriers::manifold_barrier_eval(r, t, &bp_m, m));
    }

    // Structural misuse is reported, not propagated as a crash.
    assert_eq!(
        unsafe { rdlab_cq_constant(q, m, p, c_p, ptr::null_mut()) },
        RdlabStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { rdlab_subsolution_eval(1.0, 1.0, -1.0, a, alpha, t0, m, &mut out) },
        RdlabStatus::InvalidArgument,
        "negative amplitude must be rejected"
    );
}
