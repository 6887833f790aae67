//! Fixed-order Gauss–Legendre quadrature.
//!
//! All geometric quantities in this crate (cell volumes, weighted masses,
//! stiffness/mass integrals, norm integrands) are integrals of smooth radial
//! functions over short intervals. A fixed 5-point Gauss–Legendre rule per
//! interval is exact for polynomials up to degree 9 and converges at order 10
//! for smooth integrands, which is far below round-off for the interval sizes
//! used here; it is also strictly deterministic, which the byte-stable output
//! contract requires.

/// Nodes of the 5-point Gauss–Legendre rule on the reference interval `[-1, 1]`.
///
/// The non-zero nodes are `±(1/3)·sqrt(5 ∓ 2·sqrt(10/7))`.
fn nodes() -> [f64; 5] {
    let inner = (5.0 - 2.0 * (10.0_f64 / 7.0).sqrt()).sqrt() / 3.0;
    let outer = (5.0 + 2.0 * (10.0_f64 / 7.0).sqrt()).sqrt() / 3.0;
    [-outer, -inner, 0.0, inner, outer]
}

/// Weights of the 5-point Gauss–Legendre rule, matching [`nodes`] order.
///
/// The central weight is `128/225`; the others are `(322 ± 13·sqrt(70))/900`.
fn weights() -> [f64; 5] {
    let s70 = 70.0_f64.sqrt();
    let outer = (322.0 - 13.0 * s70) / 900.0;
    let inner = (322.0 + 13.0 * s70) / 900.0;
    [outer, inner, 128.0 / 225.0, inner, outer]
}

/// The 5-point Gauss–Legendre rule on `[-1, 1]` as `(nodes, weights)`, for
/// callers that evaluate several integrands at shared nodes.
pub fn gauss_legendre_5() -> ([f64; 5], [f64; 5]) {
    (nodes(), weights())
}

/// Integrates `f` over `[lo, hi]` with a single 5-point Gauss–Legendre rule.
///
/// Degenerate intervals (`hi <= lo`) integrate to zero times the signed
/// length, i.e. the usual oriented-integral convention.
pub fn integrate<F: Fn(f64) -> f64>(lo: f64, hi: f64, f: F) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let ns = nodes();
    let ws = weights();
    let mut acc = 0.0;
    for i in 0..5 {
        acc += ws[i] * f(mid + half * ns[i]);
    }
    acc * half
}

/// Integrates `f` over `[lo, hi]` splitting the interval into `n` equal panels.
///
/// Used where the integrand varies over the whole domain rather than a single
/// mesh cell (e.g. closed-form volume cross-checks in tests).
pub fn integrate_panels<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, f: F) -> f64 {
    assert!(n > 0, "panel count must be positive");
    let h = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let a = lo + k as f64 * h;
        acc += integrate(a, a + h, &f);
    }
    acc
}
