/*
 * C interface of the rdlab slow-diffusion reaction laboratory.
 * Generated by cbindgen from the rdlab-capi crate; do not edit by hand.
 */

#ifndef RDLAB_H
#define RDLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a C-ABI call.
 */
typedef enum RdlabStatus {
  /**
   * The call succeeded.
   */
  RDLAB_STATUS_OK = 0,
  /**
   * A pointer was null, a length mismatched, or a parameter was outside
   * its admissible range.
   */
  RDLAB_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The numerical method failed to converge (time-step underflow or a
   * stalled eigenvalue iteration).
   */
  RDLAB_STATUS_NUMERICAL_FAILURE = 2,
  /**
   * A filesystem or serialization failure.
   */
  RDLAB_STATUS_IO = 3,
} RdlabStatus;

/**
 * Opaque evolution handle: geometry, weight, exponents, current profile.
 */
typedef struct RdlabSim RdlabSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the library version as a static NUL-terminated string; never null,
 * never freed by the caller.
 */
const char *rdlab_version(void);

/**
 * Returns a copy of the most recent error message on this thread, or null if
 * the last call succeeded.  The caller owns the copy and must release it
 * with [`rdlab_string_free`].
 */
char *rdlab_last_error_message(void);

/**
 * Releases a string returned by this library.  Null is accepted and ignored.
 *
 * # Safety
 * `s` must be null or a pointer previously returned by
 * [`rdlab_last_error_message`], and must not be used afterwards.
 */
void rdlab_string_free(char *s);

/**
 * Creates a simulation from a JSON configuration:
 *
 * ```json
 * {
 *   "geometry": {"kind": "hyperbolic", "dim": 3, "kappa": 1.0},
 *   "weight":   {"kind": "unit"},
 *   "m": 2.0, "p": 1.5,
 *   "k_trunc": null, "reaction": true,
 *   "r_outer": 10.0, "cells": 500,
 *   "datum": {"kind": "bump", "center": 2.0, "width": 1.0, "height": 5.0}
 * }
 * ```
 *
 * `weight` defaults to unit, `reaction` to true, `k_trunc` to untruncated.
 * The datum may also be `{"kind": "zero"}` or
 * `{"kind": "values", "values": [...]}` with exactly `cells` entries.
 *
 * Returns null on failure; the cause is available via
 * [`rdlab_last_error_message`].  Release the handle with [`rdlab_sim_free`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string valid for reads.
 */
struct RdlabSim *rdlab_sim_new(const char *config_json);

/**
 * Releases a simulation handle.  Null is accepted and ignored.
 *
 * # Safety
 * `sim` must be null or a pointer previously returned by [`rdlab_sim_new`],
 * and must not be used afterwards.
 */
void rdlab_sim_free(struct RdlabSim *sim);

/**
 * Advances the simulation by exactly `dt`, internally subdividing on solver
 * stalls down to the configured floor.
 *
 * # Safety
 * `sim` must be a live handle from [`rdlab_sim_new`], not used concurrently.
 */
enum RdlabStatus rdlab_sim_advance(struct RdlabSim *sim, double dt);

/**
 * Advances the simulation to the absolute time `t` (which must not precede
 * the current time) in steps of at most `dt_max`.
 *
 * # Safety
 * `sim` must be a live handle from [`rdlab_sim_new`], not used concurrently.
 */
enum RdlabStatus rdlab_sim_advance_to(struct RdlabSim *sim, double t, double dt_max);

/**
 * Returns the current simulation time, or NaN for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle from [`rdlab_sim_new`].
 */
double rdlab_sim_time(const struct RdlabSim *sim);

/**
 * Returns the number of radial cells, or 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle from [`rdlab_sim_new`].
 */
size_t rdlab_sim_cells(const struct RdlabSim *sim);

/**
 * Copies the cell-center radii into `out` (`len` must equal the cell count).
 *
 * # Safety
 * `sim` must be a live handle from [`rdlab_sim_new`]; `out` must be valid
 * for `len` writes.
 */
enum RdlabStatus rdlab_sim_radii(const struct RdlabSim *sim, double *out, size_t len);

/**
 * Copies the current cell-centered profile into `out` (`len` must equal the
 * cell count).
 *
 * # Safety
 * `sim` must be a live handle from [`rdlab_sim_new`]; `out` must be valid
 * for `len` writes.
 */
enum RdlabStatus rdlab_sim_profile(const struct RdlabSim *sim, double *out, size_t len);

/**
 * Writes the weighted L^q norm of the current profile to `out`; `q` must be
 * at least 1, or infinity for the max norm.
 *
 * # Safety
 * `sim` must be a live handle from [`rdlab_sim_new`]; `out` must be valid
 * for one write.
 */
enum RdlabStatus rdlab_sim_norm(const struct RdlabSim *sim, double q, double *out);

/**
 * Estimates the fundamental Dirichlet eigenvalue of the ball of radius
 * `r_outer` described by `config_json`
 * (e.g. `{"geometry": {"kind": "euclidean", "dim": 3}}`; `weight` is
 * optional) and writes λ₁ and the associated constant `1/√λ₁`-companion
 * `c_p = √λ₁` through the out pointers.  Either out pointer may be null to
 * skip that value.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string valid for reads; non-null
 * out pointers must be valid for one write each.
 */
enum RdlabStatus rdlab_poincare(const char *config_json,
                                double r_outer,
                                size_t cells,
                                double *out_lambda1,
                                double *out_c_p);

/**
 * Writes the L^q growth-rate constant `C(q)` to `out` (so that
 * `‖u(t)‖_q ≤ e^{C(q) t} ‖u₀‖_q`), from the exponents and the domain's
 * Poincaré constant `c_p`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum RdlabStatus rdlab_cq_constant(double q, double m, double p, double c_p, double *out);

/**
 * Writes the explicit sup-norm smoothing bound at time `t` to `out`, from
 * the datum's L^m size, the exponents, the dimension, the smoothing
 * prefactor `gamma`, and the L^m growth rate `c_rate`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum RdlabStatus rdlab_smoothing_bound(double t,
                                       double u0_lm_norm,
                                       double m,
                                       double p,
                                       size_t n_dim,
                                       double gamma,
                                       double c_rate,
                                       double *out);

/**
 * Writes the weighted-space subsolution barrier value at radius `r`, time
 * `t` to `out`.  The spreading exponent is derived from `alpha` by the
 * matched rule `beta = (alpha(m−1)+1)/2`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum RdlabStatus rdlab_subsolution_eval(double r,
                                        double t,
                                        double c0,
                                        double a,
                                        double alpha,
                                        double t0,
                                        double m,
                                        double *out);

/**
 * Writes the manifold grow-up barrier value at radius `r`, time `t` to
 * `out`.  The spreading exponent is derived from `alpha` by the matched
 * rule `beta = (alpha(m−1)+1)/2`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum RdlabStatus rdlab_manifold_barrier_eval(double r,
                                             double t,
                                             double c0,
                                             double a,
                                             double alpha,
                                             double t0,
                                             double m,
                                             double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* RDLAB_H */
