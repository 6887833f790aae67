//! C ABI for the slow-diffusion reaction laboratory.
//!
//! The surface follows the usual opaque-handle pattern:
//!
//! * [`rdlab_sim_new`] parses a JSON configuration into a simulation handle;
//!   [`rdlab_sim_advance`] / [`rdlab_sim_advance_to`] march it in time;
//!   accessors copy the current profile and norms out; [`rdlab_sim_free`]
//!   releases it.
//! * Every fallible call returns an [`RdlabStatus`]; on failure a
//!   thread-local message is retrievable once via
//!   [`rdlab_last_error_message`] and released with [`rdlab_string_free`].
//! * Pure evaluators (spectral estimate, growth/smoothing constants, barrier
//!   profiles) are stateless and write through `out` pointers.
//!
//! All pointers must be non-null unless stated otherwise; length arguments
//! must match the handle's cell count.  Handles are not thread-safe; use one
//! handle per thread or synchronize externally.

use std::cell::RefCell;
// Same NaN-fails-closed validation idiom as the core crate: `!(x > 0.0)`
// rejects NaN because NaN makes every comparison false.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rdlab::barriers::{manifold_barrier_eval, subsolution_eval, BarrierParams, BarrierTarget};
use rdlab::error::Error;
use rdlab::estimates::{cq_constant, smoothing_bound};
use rdlab::geometry::{Grid, RadialGeometry, Weight};
use rdlab::inequalities::poincare_estimate;
use rdlab::solver::{lq_norm, step_with_floor, ModelParams, State};
use serde::Deserialize;

/// Outcome of a C-ABI call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RdlabStatus {
    /// The call succeeded.
    Ok = 0,
    /// A pointer was null, a length mismatched, or a parameter was outside
    /// its admissible range.
    InvalidArgument = 1,
    /// The numerical method failed to converge (time-step underflow or a
    /// stalled eigenvalue iteration).
    NumericalFailure = 2,
    /// A filesystem or serialization failure.
    Io = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).ok();
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

fn status_of(err: &Error) -> RdlabStatus {
    match err {
        Error::InvalidParameter(_) | Error::Config(_) => RdlabStatus::InvalidArgument,
        Error::TimeStepUnderflow { .. } | Error::EigenNotConverged { .. } => {
            RdlabStatus::NumericalFailure
        }
        Error::Io(_) => RdlabStatus::Io,
        Error::Json(_) => RdlabStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> RdlabStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn invalid(msg: &str) -> RdlabStatus {
    set_error(msg);
    RdlabStatus::InvalidArgument
}

/// Runs a fallible body with panic containment: a Rust panic must never
/// unwind across the C boundary.
fn guarded(body: impl FnOnce() -> Result<(), RdlabStatus>) -> RdlabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_error();
            RdlabStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal panic".into());
            set_error(&msg);
            RdlabStatus::InvalidArgument
        }
    }
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string valid for reads.
unsafe fn parse_utf8<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, RdlabStatus> {
    if ptr.is_null() {
        return Err(invalid(&format!("{what} pointer is null")));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

// ---------------------------------------------------------------------------
// Version and error retrieval
// ---------------------------------------------------------------------------

/// Returns the library version as a static NUL-terminated string; never null,
/// never freed by the caller.
#[no_mangle]
pub extern "C" fn rdlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns a copy of the most recent error message on this thread, or null if
/// the last call succeeded.  The caller owns the copy and must release it
/// with [`rdlab_string_free`].
#[no_mangle]
pub extern "C" fn rdlab_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Releases a string returned by this library.  Null is accepted and ignored.
///
/// # Safety
/// `s` must be null or a pointer previously returned by
/// [`rdlab_last_error_message`], and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rdlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

// ---------------------------------------------------------------------------
// Simulation handles
// ---------------------------------------------------------------------------

/// Opaque evolution handle: geometry, weight, exponents, current profile.
pub struct RdlabSim {
    params: ModelParams,
    grid: Grid,
    state: State,
    dt_min: f64,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DatumSpec {
    /// Identically zero.
    Zero,
    /// Smooth compactly supported bump
    /// `height · exp(1 − 1/(1 − x²))`, `x = (r − center)/width`.
    Bump { center: f64, width: f64, height: f64 },
    /// Explicit cell-centered values; length must equal `cells`.
    Values { values: Vec<f64> },
}

fn default_reaction() -> bool {
    true
}

fn default_dt_min() -> f64 {
    1e-12
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimConfig {
    geometry: RadialGeometry,
    #[serde(default)]
    weight: Option<Weight>,
    m: f64,
    p: f64,
    #[serde(default)]
    k_trunc: Option<f64>,
    #[serde(default = "default_reaction")]
    reaction: bool,
    r_outer: f64,
    cells: usize,
    datum: DatumSpec,
    #[serde(default = "default_dt_min")]
    dt_min: f64,
}

fn build_sim(json: &str) -> Result<RdlabSim, Error> {
    let cfg: SimConfig = serde_json::from_str(json)?;
    let weight = cfg.weight.unwrap_or(Weight::Unit);
    let params = ModelParams {
        m: cfg.m,
        p: cfg.p,
        k_trunc: cfg.k_trunc,
        reaction: cfg.reaction,
        geom: cfg.geometry,
        weight,
        r_outer: cfg.r_outer,
    };
    params.validate()?;
    let grid = Grid::build(&cfg.geometry, &weight, cfg.r_outer, cfg.cells)?;
    let datum: Vec<f64> = match cfg.datum {
        DatumSpec::Zero => vec![0.0; cfg.cells],
        DatumSpec::Bump {
            center,
            width,
            height,
        } => grid
            .centers
            .iter()
            .map(|&r| {
                let x = (r - center) / width;
                if x.abs() < 1.0 {
                    height * (1.0 - 1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            })
            .collect(),
        DatumSpec::Values { values } => values,
    };
    let state = State::initial(&grid, &datum)?;
    if !(cfg.dt_min > 0.0) || !cfg.dt_min.is_finite() {
        return Err(Error::invalid(format!(
            "dt_min must be positive and finite, got {}",
            cfg.dt_min
        )));
    }
    Ok(RdlabSim {
        params,
        grid,
        state,
        dt_min: cfg.dt_min,
    })
}

/// Creates a simulation from a JSON configuration:
///
/// ```json
/// {
///   "geometry": {"kind": "hyperbolic", "dim": 3, "kappa": 1.0},
///   "weight":   {"kind": "unit"},
///   "m": 2.0, "p": 1.5,
///   "k_trunc": null, "reaction": true,
///   "r_outer": 10.0, "cells": 500,
///   "datum": {"kind": "bump", "center": 2.0, "width": 1.0, "height": 5.0}
/// }
/// ```
///
/// `weight` defaults to unit, `reaction` to true, `k_trunc` to untruncated.
/// The datum may also be `{"kind": "zero"}` or
/// `{"kind": "values", "values": [...]}` with exactly `cells` entries.
///
/// Returns null on failure; the cause is available via
/// [`rdlab_last_error_message`].  Release the handle with [`rdlab_sim_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string valid for reads.
#[no_mangle]
pub unsafe extern "C" fn rdlab_sim_new(config_json: *const c_char) -> *mut RdlabSim {
    let mut out: *mut RdlabSim = ptr::null_mut();
    let status = guarded(|| {
        let json = unsafe { parse_utf8(config_json, "config") }?;
        let sim = build_sim(json).map_err(fail)?;
        out = Box::into_raw(Box::new(sim));
        Ok(())
    });
    debug_assert_eq!(status == RdlabStatus::Ok, !out.is_null());
    out
}

/// Releases a simulation handle.  Null is accepted and ignored.
///
/// # Safety
/// `sim` must be null or a pointer previously returned by [`rdlab_sim_new`],
/// and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rdlab_sim_free(sim: *mut RdlabSim) {
    if !sim.is_null() {
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// # Safety
/// See the public accessors: `sim` must be a live handle from
/// [`rdlab_sim_new`].
unsafe fn sim_ref<'a>(sim: *const RdlabSim) -> Result<&'a RdlabSim, RdlabStatus> {
    if sim.is_null() {
        return Err(invalid("simulation handle is null"));
    }
    Ok(unsafe { &*sim })
}

/// Advances the simulation by exactly `dt`, internally subdividing on solver
/// stalls down to the configured floor.
///
/// # Safety
/// `sim` must be a live handle from [`rdlab_sim_new`], not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn rdlab_sim_advance(sim: *mut RdlabSim, dt: f64) -> RdlabStatus {
    guarded(|| {
        if sim.is_null() {
            return Err(invalid("simulation handle is null"));
        }
        let sim = unsafe { &mut *sim };
        let next = step_with_floor(&sim.params, &sim.grid, &sim.state, dt, sim.dt_min)
            .map_err(fail)?;
        sim.state = next;
        Ok(())
    })
}

/// Advances the simulation to the absolute time `t` (which must not precede
/// the current time) in steps of at most `dt_max`.
///
/// # Safety
/// `sim` must be a live handle from [`rdlab_sim_new`], not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn rdlab_sim_advance_to(
    sim: *mut RdlabSim,
    t: f64,
    dt_max: f64,
) -> RdlabStatus {
    guarded(|| {
        if sim.is_null() {
            return Err(invalid("simulation handle is null"));
        }
        if !(dt_max > 0.0) || !dt_max.is_finite() {
            return Err(invalid(&format!(
                "dt_max must be positive and finite, got {dt_max}"
            )));
        }
        let sim = unsafe { &mut *sim };
        if !(t >= sim.state.t) || !t.is_finite() {
            return Err(invalid(&format!(
                "target time {t} precedes the current time {}",
                sim.state.t
            )));
        }
        while sim.state.t < t {
            let dt = dt_max.min(t - sim.state.t);
            if dt <= 0.0 {
                break;
            }
            let next = step_with_floor(&sim.params, &sim.grid, &sim.state, dt, sim.dt_min)
                .map_err(fail)?;
            sim.state = next;
        }
        // Land exactly on the target despite accumulated rounding.
        sim.state.t = t;
        Ok(())
    })
}

/// Returns the current simulation time, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle from [`rdlab_sim_new`].
#[no_mangle]
pub unsafe extern "C" fn rdlab_sim_time(sim: *const RdlabSim) -> f64 {
    match unsafe { sim_ref(sim) } {
        Ok(s) => s.state.t,
        Err(_) => f64::NAN,
    }
}

/// Returns the number of radial cells, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle from [`rdlab_sim_new`].
#[no_mangle]
pub unsafe extern "C" fn rdlab_sim_cells(sim: *const RdlabSim) -> usize {
    match unsafe { sim_ref(sim) } {
        Ok(s) => s.grid.n(),
        Err(_) => 0,
    }
}

/// # Safety
/// `out` must be valid for `len` writes.
unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize, what: &str) -> Result<(), RdlabStatus> {
    if out.is_null() {
        return Err(invalid(&format!("{what} output pointer is null")));
    }
    if len != src.len() {
        return Err(invalid(&format!(
            "{what} buffer holds {len} values but the simulation has {} cells",
            src.len()
        )));
    }
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), out, len) };
    Ok(())
}

/// Copies the cell-center radii into `out` (`len` must equal the cell count).
///
/// # Safety
/// `sim` must be a live handle from [`rdlab_sim_new`]; `out` must be valid
/// for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rdlab_sim_radii(
    sim: *const RdlabSim,
    out: *mut f64,
    len: usize,
) -> RdlabStatus {
    guarded(|| {
        let sim = unsafe { sim_ref(sim) }?;
        unsafe { copy_out(&sim.grid.centers, out, len, "radii") }
    })
}

/// Copies the current cell-centered profile into `out` (`len` must equal the
/// cell count).
///
/// # Safety
/// `sim` must be a live handle from [`rdlab_sim_new`]; `out` must be valid
/// for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rdlab_sim_profile(
    sim: *const RdlabSim,
    out: *mut f64,
    len: usize,
) -> RdlabStatus {
    guarded(|| {
        let sim = unsafe { sim_ref(sim) }?;
        unsafe { copy_out(&sim.state.u, out, len, "profile") }
    })
}

/// Writes the weighted L^q norm of the current profile to `out`; `q` must be
/// at least 1, or infinity for the max norm.
///
/// # Safety
/// `sim` must be a live handle from [`rdlab_sim_new`]; `out` must be valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn rdlab_sim_norm(
    sim: *const RdlabSim,
    q: f64,
    out: *mut f64,
) -> RdlabStatus {
    guarded(|| {
        let sim = unsafe { sim_ref(sim) }?;
        if out.is_null() {
            return Err(invalid("norm output pointer is null"));
        }
        let value = lq_norm(&sim.grid, &sim.state.u, q).map_err(fail)?;
        unsafe { *out = value };
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Spectral estimate
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PoincareConfig {
    geometry: RadialGeometry,
    #[serde(default)]
    weight: Option<Weight>,
}

/// Estimates the fundamental Dirichlet eigenvalue of the ball of radius
/// `r_outer` described by `config_json`
/// (e.g. `{"geometry": {"kind": "euclidean", "dim": 3}}`; `weight` is
/// optional) and writes λ₁ and the associated constant `1/√λ₁`-companion
/// `c_p = √λ₁` through the out pointers.  Either out pointer may be null to
/// skip that value.
///
/// # Safety
/// `config_json` must be a NUL-terminated string valid for reads; non-null
/// out pointers must be valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn rdlab_poincare(
    config_json: *const c_char,
    r_outer: f64,
    cells: usize,
    out_lambda1: *mut f64,
    out_c_p: *mut f64,
) -> RdlabStatus {
    guarded(|| {
        let json = unsafe { parse_utf8(config_json, "config") }?;
        let cfg: PoincareConfig =
            serde_json::from_str(json).map_err(|e| fail(Error::Json(e)))?;
        let est = poincare_estimate(
            cfg.geometry,
            cfg.weight.unwrap_or(Weight::Unit),
            r_outer,
            cells,
        )
        .map_err(fail)?;
        if !out_lambda1.is_null() {
            unsafe { *out_lambda1 = est.lambda1 };
        }
        if !out_c_p.is_null() {
            unsafe { *out_c_p = est.c_p };
        }
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Pure evaluators
// ---------------------------------------------------------------------------

/// Writes the L^q growth-rate constant `C(q)` to `out` (so that
/// `‖u(t)‖_q ≤ e^{C(q) t} ‖u₀‖_q`), from the exponents and the domain's
/// Poincaré constant `c_p`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rdlab_cq_constant(
    q: f64,
    m: f64,
    p: f64,
    c_p: f64,
    out: *mut f64,
) -> RdlabStatus {
    guarded(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let value = cq_constant(q, m, p, c_p).map_err(fail)?;
        unsafe { *out = value };
        Ok(())
    })
}

/// Writes the explicit sup-norm smoothing bound at time `t` to `out`, from
/// the datum's L^m size, the exponents, the dimension, the smoothing
/// prefactor `gamma`, and the L^m growth rate `c_rate`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rdlab_smoothing_bound(
    t: f64,
    u0_lm_norm: f64,
    m: f64,
    p: f64,
    n_dim: usize,
    gamma: f64,
    c_rate: f64,
    out: *mut f64,
) -> RdlabStatus {
    guarded(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let value = smoothing_bound(t, u0_lm_norm, m, p, n_dim, gamma, c_rate).map_err(fail)?;
        unsafe { *out = value };
        Ok(())
    })
}

fn barrier_params(
    c0: f64,
    a: f64,
    alpha: f64,
    t0: f64,
    m: f64,
    target: BarrierTarget,
) -> Result<BarrierParams, RdlabStatus> {
    let bp = BarrierParams::with_beta_rule(c0, a, alpha, t0, m, target);
    bp.validate().map_err(fail)?;
    Ok(bp)
}

/// Writes the weighted-space subsolution barrier value at radius `r`, time
/// `t` to `out`.  The spreading exponent is derived from `alpha` by the
/// matched rule `beta = (alpha(m−1)+1)/2`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rdlab_subsolution_eval(
    r: f64,
    t: f64,
    c0: f64,
    a: f64,
    alpha: f64,
    t0: f64,
    m: f64,
    out: *mut f64,
) -> RdlabStatus {
    guarded(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let bp = barrier_params(c0, a, alpha, t0, m, BarrierTarget::WeightedEuclidean)?;
        unsafe { *out = subsolution_eval(r, t, &bp, m) };
        Ok(())
    })
}

/// Writes the manifold grow-up barrier value at radius `r`, time `t` to
/// `out`.  The spreading exponent is derived from `alpha` by the matched
/// rule `beta = (alpha(m−1)+1)/2`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rdlab_manifold_barrier_eval(
    r: f64,
    t: f64,
    c0: f64,
    a: f64,
    alpha: f64,
    t0: f64,
    m: f64,
    out: *mut f64,
) -> RdlabStatus {
    guarded(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let bp = barrier_params(c0, a, alpha, t0, m, BarrierTarget::Manifold)?;
        unsafe { *out = manifold_barrier_eval(r, t, &bp, m) };
        Ok(())
    })
}
