//! Self-similar barrier families driving infinite-time blow-up, with exact
//! residual evaluation and feasibility certificates.
//!
//! Two constructions are provided.
//!
//! **Weighted Euclidean barrier.** On `ℝᴺ` with an inverse-square density
//! (reciprocal envelope `k₁r² ≤ 1/ρ ≤ k₂r²` outside the seam radius,
//! `ρ₁ ≤ 1/ρ ≤ ρ₂` inside), the subsolution is built from the matched radial
//! profile
//!
//! ```text
//! 𝔰(r) = log r            for r ≥ e ,
//! 𝔰(r) = (r² + e²)/(2e²)  for r < e ,
//! ```
//!
//! (`C¹` across the seam: value 1, slope 1/e) as
//!
//! ```text
//! w(r,t) = C θ^α [ 1 − 𝔰(r) θ^{−β}/a ]₊^{1/(m−1)} ,   θ = T + t ,
//! ```
//!
//! with `0 < α < 1/(m−1)` and the matched rate `β = (α(m−1)+1)/2`. The
//! grow-up rate `θ^α` and the support radius `≈ exp(a θ^β)` are certified by
//! closed-form *envelope functions* `σ, δ, γ` (outer region) and `σ₀, δ₀`
//! (inner region): the parabolic residual is nonpositive whenever
//!
//! ```text
//! φ(F) = σF − δ − γF^{(p+m−2)/(m−1)} ≤ 0   on the outer profile range, and
//! ψ(G) = σ₀G − δ₀ − γG^{(p+m−2)/(m−1)} ≤ 0 on the inner range  [½, 1] ,
//! ```
//!
//! which in turn follows from the four closed-form certificates checked by
//! [`validate_barrier`]. [`subsolution_residual`] evaluates the actual
//! residual `wₜ − (1/ρ)Δwᵐ − wᵖ` from the exact piecewise derivatives — it is
//! the ground truth the certificates are sufficient (not necessary) for.
//!
//! **Manifold barrier.** On hyperbolic space the same exponents feed the
//! compact-support family
//!
//! ```text
//! w(r,t) = C ζ(t) [ 1 − (r/a) η(t) ]₊^{1/(m−1)} ,  ζ = (τ+t)^α, η = (τ+t)^{−β} ,
//! ```
//!
//! whose center value grows like `(τ+t)^α` and support radius like
//! `a(τ+t)^β`.

use crate::error::{Error, Result};
use crate::geometry::{Weight, WeightEnvelope};
use serde::{Deserialize, Serialize};

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(msg.into()))
    }
}

/// Which construction a parameter set belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierTarget {
    /// Inverse-square-weighted Euclidean space (log-profile barrier).
    WeightedEuclidean,
    /// Hyperbolic space (linear-profile barrier).
    Manifold,
}

/// Parameters of a barrier: amplitude `C`, profile scale `a`, grow-up
/// exponent `α`, spreading exponent `β`, and time offset `T` (written `τ` in
/// the manifold construction).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    /// Amplitude `C > 0`.
    pub c0: f64,
    /// Profile scale `a > 0`.
    pub a: f64,
    /// Grow-up exponent `α`.
    pub alpha: f64,
    /// Spreading exponent `β`.
    pub beta: f64,
    /// Time offset `T > 0` (τ).
    pub t0: f64,
    /// Which construction these parameters feed.
    pub target: BarrierTarget,
}

/// The matched spreading rate `β = (α(m−1)+1)/2`.
pub fn beta_rule(alpha: f64, m: f64) -> f64 {
    (alpha * (m - 1.0) + 1.0) / 2.0
}

impl BarrierParams {
    /// Constructs parameters with `β` set by the matched rule.
    pub fn with_beta_rule(c0: f64, a: f64, alpha: f64, t0: f64, m: f64, target: BarrierTarget) -> BarrierParams {
        BarrierParams {
            c0,
            a,
            alpha,
            beta: beta_rule(alpha, m),
            t0,
            target,
        }
    }

    /// Structural positivity/finiteness checks (not the feasibility
    /// certificates — see [`validate_barrier`]).
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("amplitude", self.c0),
            ("profile scale", self.a),
            ("time offset", self.t0),
        ] {
            require(
                v > 0.0 && v.is_finite(),
                format!("barrier {name} must be positive and finite, got {v}"),
            )?;
        }
        require(
            self.alpha.is_finite() && self.beta.is_finite(),
            "barrier exponents must be finite",
        )?;
        Ok(())
    }
}

/// The matched radial profile `𝔰` and its derivative: `(log r, 1/r)` for
/// `r ≥ e`, `((r²+e²)/(2e²), r/e²)` for `r < e`. `C¹` across the seam with
/// value `1` and slope `1/e`.
pub fn s_profile(r: f64) -> (f64, f64) {
    assert!(r >= 0.0, "the matched profile is defined for r >= 0, got {r}");
    let e = std::f64::consts::E;
    if r >= e {
        (r.ln(), 1.0 / r)
    } else {
        ((r * r + e * e) / (2.0 * e * e), r / (e * e))
    }
}

/// Value of the weighted-Euclidean subsolution
/// `w(r,t) = C θ^α [1 − 𝔰(r) θ^{−β}/a]₊^{1/(m−1)}`.
pub fn subsolution_eval(r: f64, t: f64, bp: &BarrierParams, m: f64) -> f64 {
    let theta = bp.t0 + t;
    let (s_val, _) = s_profile(r);
    let profile = 1.0 - s_val * theta.powf(-bp.beta) / bp.a;
    if profile <= 0.0 {
        0.0
    } else {
        bp.c0 * theta.powf(bp.alpha) * profile.powf(1.0 / (m - 1.0))
    }
}

/// Exact parabolic residual `wₜ − (1/ρ(r)) Δwᵐ − wᵖ` of the
/// weighted-Euclidean subsolution at a smooth interior point, from the
/// closed-form piecewise derivatives. Negative values certify the
/// subsolution property at that point.
///
/// The density is the *actual* `ρ` of `weight`, not its envelope. Points
/// where the profile factor (`F` outside the seam, `G` inside) leaves
/// `[margin, 1]` are rejected: at the free boundary the `F^{1/(m−1)−1}` terms
/// degenerate and the pointwise residual is meaningless.
#[allow(clippy::too_many_arguments)] // flat numeric inputs; a struct would obscure the call sites
pub fn subsolution_residual(
    r: f64,
    t: f64,
    bp: &BarrierParams,
    m: f64,
    p: f64,
    weight: &Weight,
    n_dim: usize,
    margin: f64,
) -> Result<f64> {
    bp.validate()?;
    require(
        bp.target == BarrierTarget::WeightedEuclidean,
        "the log-profile residual belongs to the weighted-Euclidean construction",
    )?;
    require(m > 1.0 && p > 1.0 && p < m, format!("need 1 < p < m, got p = {p}, m = {m}"))?;
    require(t >= 0.0, format!("time must be nonnegative, got {t}"))?;
    require(
        margin > 0.0 && margin < 0.5,
        format!("profile margin must lie in (0, 0.5), got {margin}"),
    )?;
    // Beyond ~1e130 the squared radius overflows and the density quotient
    // degenerates to 0/0; pointwise evaluation there is outside
    // double-precision range.
    require(
        r <= 1e130,
        format!("radius {r} exceeds the floating-point range of the density quotient"),
    )?;
    let e = std::f64::consts::E;
    let n = n_dim as f64;
    let theta = bp.t0 + t;
    let eta = theta.powf(-bp.beta); // θ^{−β}
    let m1 = 1.0 / (m - 1.0);
    let c = bp.c0;
    let a = bp.a;
    let rho = weight.eval(r);

    if r >= e {
        // Outer region: F = 1 − log(r)·θ^{−β}/a.
        let f = 1.0 - r.ln() * eta / a;
        require(
            f >= margin && f <= 1.0 - 0.0,
            format!("outer profile F = {f} outside [{margin}, 1] at r = {r}, t = {t}"),
        )?;
        let w_t = c * bp.alpha * theta.powf(bp.alpha - 1.0) * f.powf(m1)
            - c * (bp.beta / (m - 1.0)) * theta.powf(bp.alpha - 1.0) * f.powf(m1)
            + c * (bp.beta / (m - 1.0)) * theta.powf(bp.alpha - 1.0) * f.powf(m1 - 1.0);
        let wm_r = -(c.powf(m) / a)
            * theta.powf(m * bp.alpha)
            * (m / (m - 1.0))
            * f.powf(m1)
            * eta
            / r;
        let wm_rr = (c.powf(m) / a)
            * theta.powf(m * bp.alpha)
            * (m / (m - 1.0))
            * f.powf(m1)
            * eta
            / (r * r)
            + (c.powf(m) / (a * a))
                * theta.powf(m * bp.alpha)
                * (m / ((m - 1.0) * (m - 1.0)))
                * f.powf(m1 - 1.0)
                * eta
                * eta
                / (r * r);
        let laplacian = wm_rr + (n - 1.0) / r * wm_r;
        let w = c * theta.powf(bp.alpha) * f.powf(m1);
        Ok(w_t - laplacian / rho - w.powf(p))
    } else {
        // Inner region: G = 1 − (r²+e²)/(2e²)·θ^{−β}/a.
        let g = 1.0 - (r * r + e * e) / (2.0 * e * e) * eta / a;
        require(
            g >= margin && g <= 1.0,
            format!("inner profile G = {g} outside [{margin}, 1] at r = {r}, t = {t}"),
        )?;
        let v_t = c * bp.alpha * theta.powf(bp.alpha - 1.0) * g.powf(m1)
            - c * (bp.beta / (m - 1.0)) * theta.powf(bp.alpha - 1.0) * g.powf(m1)
            + c * (bp.beta / (m - 1.0)) * theta.powf(bp.alpha - 1.0) * g.powf(m1 - 1.0);
        let vm_rr = -(c.powf(m) / a)
            * theta.powf(m * bp.alpha)
            * (m / (m - 1.0))
            * g.powf(m1)
            * eta
            / (e * e)
            + (c.powf(m) / (a * a))
                * theta.powf(m * bp.alpha)
                * (m / ((m - 1.0) * (m - 1.0)))
                * g.powf(m1 - 1.0)
                * eta
                * eta
                * r
                * r
                / (e * e * e * e);
        // (1/r)·(vᵐ)_r is regular: (vᵐ)_r = −(Cᵐ/a)θ^{mα}(m/(m−1))G^{1/(m−1)}·η·r/e².
        let vm_r_over_r = -(c.powf(m) / a)
            * theta.powf(m * bp.alpha)
            * (m / (m - 1.0))
            * g.powf(m1)
            * eta
            / (e * e);
        let laplacian = vm_rr + (n - 1.0) * vm_r_over_r;
        let v = c * theta.powf(bp.alpha) * g.powf(m1);
        Ok(v_t - laplacian / rho - v.powf(p))
    }
}

/// One-sided fluxes of `wᵐ` at the seam `r = e`, plus the closed form they
/// must both equal: `−Cᵐ θ^{mα} (m/(m−1)) (1/e) (η/a) [1−η/a]₊^{1/(m−1)}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeamFlux {
    /// `(wᵐ)_r` at `r = e⁺` (outer formula).
    pub outer: f64,
    /// `(wᵐ)_r` at `r = e⁻` (inner formula).
    pub inner: f64,
    /// The shared closed form.
    pub closed_form: f64,
}

/// Evaluates both one-sided seam fluxes; `C¹` matching of `wᵐ` across the
/// seam means all three fields agree.
pub fn seam_flux(t: f64, bp: &BarrierParams, m: f64) -> Result<SeamFlux> {
    bp.validate()?;
    require(t >= 0.0, format!("time must be nonnegative, got {t}"))?;
    let e = std::f64::consts::E;
    let theta = bp.t0 + t;
    let eta = theta.powf(-bp.beta);
    let m1 = 1.0 / (m - 1.0);
    let level = 1.0 - eta / bp.a; // F(e) = G(e) = 1 − η/a
    let level_pos = level.max(0.0);
    let outer = -(bp.c0.powf(m) / bp.a)
        * theta.powf(m * bp.alpha)
        * (m / (m - 1.0))
        * level_pos.powf(m1)
        * eta
        / e;
    let inner = -(bp.c0.powf(m) / bp.a)
        * theta.powf(m * bp.alpha)
        * (m / (m - 1.0))
        * level_pos.powf(m1)
        * (e / (e * e))
        * eta;
    let closed_form = -bp.c0.powf(m)
        * theta.powf(m * bp.alpha)
        * (m / (m - 1.0))
        * (1.0 / e)
        * (eta / bp.a)
        * level_pos.powf(m1);
    Ok(SeamFlux {
        outer,
        inner,
        closed_form,
    })
}

/// Snapshot of the closed-form envelope functions at one time.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnvelopeSnapshot {
    /// Outer linear coefficient
    /// `σ = [α−β/(m−1)]θ^{α−1} + (C^{m−1}/a)(m/(m−1))k₂(N−2)θ^{mα−β}`.
    pub sigma: f64,
    /// Outer constant term
    /// `δ = −(β/(m−1))θ^{α−1} + (C^{m−1}/a²)(m/(m−1)²)k₁θ^{mα−2β}`.
    pub delta: f64,
    /// Reaction coefficient `γ = C^{p−1}θ^{pα}`.
    pub gamma: f64,
    /// Inner linear coefficient
    /// `σ₀ = [α−β/(m−1)]θ^{α−1} + ρ₂(N/e²)(m/(m−1))(C^{m−1}/a)θ^{mα−β}`.
    pub sigma0: f64,
    /// Inner constant term `δ₀ = −(β/(m−1))θ^{α−1}`.
    pub delta0: f64,
    /// The structural constant
    /// `K = λ^{(m−1)/(p−1)} − λ^{(p+m−2)/(p−1)}`, `λ = (m−1)/(p+m−2)`;
    /// positive throughout `1 < p < m`.
    pub k_const: f64,
    /// Maximizer `F₀ = [λσ/γ]^{(m−1)/(p−1)}` of `φ` over `F > 0`.
    pub f0: f64,
    /// Peak value `φ(F₀)`; the outer certificate is `φ(F₀) ≤ 0`.
    pub phi_at_f0: f64,
}

impl EnvelopeSnapshot {
    /// `φ(F) = σF − δ − γF^{(p+m−2)/(m−1)}` (outer comparison polynomial).
    pub fn phi(&self, f: f64, m: f64, p: f64) -> f64 {
        self.sigma * f - self.delta - self.gamma * f.powf((p + m - 2.0) / (m - 1.0))
    }

    /// `ψ(G) = σ₀G − δ₀ − γG^{(p+m−2)/(m−1)}` (inner comparison polynomial).
    pub fn psi(&self, g: f64, m: f64, p: f64) -> f64 {
        self.sigma0 * g - self.delta0 - self.gamma * g.powf((p + m - 2.0) / (m - 1.0))
    }
}

/// The structural constant `K` of the outer certificate; positive for all
/// `1 < p < m`.
pub fn k_constant(m: f64, p: f64) -> Result<f64> {
    require(m > 1.0 && p > 1.0 && p < m, format!("need 1 < p < m, got p = {p}, m = {m}"))?;
    let lambda = (m - 1.0) / (p + m - 2.0);
    Ok(lambda.powf((m - 1.0) / (p - 1.0)) - lambda.powf((p + m - 2.0) / (p - 1.0)))
}

/// Evaluates the envelope functions at time `t` against a reciprocal-density
/// envelope.
pub fn envelope(
    t: f64,
    bp: &BarrierParams,
    m: f64,
    p: f64,
    env: &WeightEnvelope,
    n_dim: usize,
) -> Result<EnvelopeSnapshot> {
    bp.validate()?;
    require(m > 1.0 && p > 1.0 && p < m, format!("need 1 < p < m, got p = {p}, m = {m}"))?;
    require(t >= 0.0, format!("time must be nonnegative, got {t}"))?;
    require(n_dim >= 3, format!("dimension must be >= 3, got {n_dim}"))?;
    let e = std::f64::consts::E;
    let n = n_dim as f64;
    let theta = bp.t0 + t;
    let (alpha, beta, c, a) = (bp.alpha, bp.beta, bp.c0, bp.a);
    let cm1 = c.powf(m - 1.0);
    let sigma = (alpha - beta / (m - 1.0)) * theta.powf(alpha - 1.0)
        + (cm1 / a) * (m / (m - 1.0)) * env.k2 * (n - 2.0) * theta.powf(m * alpha - beta);
    let delta = -(beta / (m - 1.0)) * theta.powf(alpha - 1.0)
        + (cm1 / (a * a)) * (m / ((m - 1.0) * (m - 1.0))) * env.k1
            * theta.powf(m * alpha - 2.0 * beta);
    let gamma = c.powf(p - 1.0) * theta.powf(p * alpha);
    let sigma0 = (alpha - beta / (m - 1.0)) * theta.powf(alpha - 1.0)
        + env.rho2 * (n / (e * e)) * (m / (m - 1.0)) * (cm1 / a) * theta.powf(m * alpha - beta);
    let delta0 = -(beta / (m - 1.0)) * theta.powf(alpha - 1.0);
    let k_const = k_constant(m, p)?;
    let lambda = (m - 1.0) / (p + m - 2.0);
    let f0 = (lambda * sigma / gamma).max(0.0).powf((m - 1.0) / (p - 1.0));
    let snap = EnvelopeSnapshot {
        sigma,
        delta,
        gamma,
        sigma0,
        delta0,
        k_const,
        f0,
        phi_at_f0: 0.0,
    };
    let phi_at_f0 = snap.phi(f0, m, p);
    Ok(EnvelopeSnapshot { phi_at_f0, ..snap })
}

/// One named feasibility certificate with its margin (positive = satisfied
/// with that much slack, in the units stated by `detail`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionCheck {
    /// Stable identifier of the certificate.
    pub name: String,
    /// Whether the certificate holds.
    pub satisfied: bool,
    /// Slack: nonnegative iff satisfied (up to the equality tolerance noted
    /// in `detail`).
    pub margin: f64,
    /// Human-readable explanation of the margin's normalization.
    pub detail: String,
}

/// Outcome of [`validate_barrier`]: all certificates with margins, plus the
/// overall verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// True iff every certificate is satisfied.
    pub feasible: bool,
    /// The individual certificates.
    pub conditions: Vec<ConditionCheck>,
}

/// The default time grid for the time-dependent certificates: `t = 0` plus
/// 100 logarithmically spaced points spanning `[10⁻³, 10⁴]`.
pub fn default_time_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let (lo, hi) = (1e-3f64.ln(), 1e4f64.ln());
    for i in 0..100 {
        grid.push((lo + (hi - lo) * i as f64 / 99.0).exp());
    }
    grid
}

/// Checks every closed-form feasibility certificate of a barrier parameter
/// set.
///
/// For the weighted-Euclidean target (reciprocal envelope required):
///
/// 1. `exponent_window`: `0 < α < 1/(m−1)`;
/// 2. `beta_rule`: `β = (α(m−1)+1)/2` to 10⁻¹²;
/// 3. `initial_level`: `T^{−β} < a/2` (keeps the inner profile above ½);
/// 4. `amplitude_threshold`: `C^{m−1}/a ≥ 2β(m−1)/(m k₁)`;
/// 5. `outer_range`: `(m−1)σ ≤ (p+m−2)γ` on the time grid (so `F₀ ≤ 1`);
/// 6. `outer_peak`: `K σ^{(p+m−2)/(p−1)} ≤ δ γ^{(m−1)/(p−1)}` on the grid
///    (equivalently `φ(F₀) ≤ 0`);
/// 7. `inner_bound`: `2^{(p+m−2)/(m−1)}(σ₀ − δ₀) ≤ γ` on the grid;
/// 8. `asymptotic_exponents`: the θ-power of each left side above stays at or
///    below the θ-power of its right side, so the grid verdicts persist as
///    `t → ∞`.
///
/// For the manifold target only certificates 1–2 apply.
pub fn validate_barrier(
    bp: &BarrierParams,
    m: f64,
    p: f64,
    env: Option<&WeightEnvelope>,
    n_dim: usize,
    t_grid: &[f64],
) -> Result<FeasibilityReport> {
    bp.validate()?;
    require(m > 1.0 && p > 1.0 && p < m, format!("need 1 < p < m, got p = {p}, m = {m}"))?;
    let mut conditions = Vec::new();

    // 1. Exponent window.
    let window_hi = 1.0 / (m - 1.0);
    let window_margin = bp.alpha.min(window_hi - bp.alpha);
    conditions.push(ConditionCheck {
        name: "exponent_window".into(),
        satisfied: bp.alpha > 0.0 && bp.alpha < window_hi,
        margin: window_margin,
        detail: format!("distance of alpha = {} from the ends of (0, {window_hi})", bp.alpha),
    });

    // 2. Matched spreading rate.
    let rule = beta_rule(bp.alpha, m);
    let beta_diff = (bp.beta - rule).abs();
    conditions.push(ConditionCheck {
        name: "beta_rule".into(),
        satisfied: beta_diff <= 1e-12,
        margin: -beta_diff,
        detail: format!("negated |beta − (alpha(m−1)+1)/2| = |{} − {rule}|", bp.beta),
    });

    if bp.target == BarrierTarget::Manifold {
        let feasible = conditions.iter().all(|c| c.satisfied);
        return Ok(FeasibilityReport {
            feasible,
            conditions,
        });
    }

    let env = env.ok_or_else(|| {
        Error::invalid("the weighted-Euclidean certificates need a reciprocal-density envelope")
    })?;
    require(!t_grid.is_empty(), "certificate time grid must not be empty")?;
    require(
        t_grid.iter().all(|t| *t >= 0.0 && t.is_finite()),
        "certificate time grid must be nonnegative and finite",
    )?;

    // 3. Initial level below half the profile scale.
    let level0 = bp.t0.powf(-bp.beta);
    conditions.push(ConditionCheck {
        name: "initial_level".into(),
        satisfied: level0 < bp.a / 2.0,
        margin: bp.a / 2.0 - level0,
        detail: format!("a/2 − T^(−beta) = {}/2 − {level0}", bp.a),
    });

    // 4. Amplitude above the spreading threshold.
    let amp = bp.c0.powf(m - 1.0) / bp.a;
    let amp_threshold = 2.0 * bp.beta * (m - 1.0) / (m * env.k1);
    conditions.push(ConditionCheck {
        name: "amplitude_threshold".into(),
        satisfied: amp >= amp_threshold,
        margin: amp - amp_threshold,
        detail: format!("C^(m−1)/a − 2·beta·(m−1)/(m·k1) = {amp} − {amp_threshold}"),
    });

    // 5–7. Grid certificates on the envelope functions.
    let pw = (p + m - 2.0) / (p - 1.0); // exponent on σ in the peak bound
    let gw = (m - 1.0) / (p - 1.0); // exponent on γ in the peak bound
    let two_pow = (2.0f64).powf((p + m - 2.0) / (m - 1.0));
    let k_const = k_constant(m, p)?;
    let mut range_margin = f64::INFINITY;
    let mut peak_margin = f64::INFINITY;
    let mut inner_margin = f64::INFINITY;
    let mut range_ok = true;
    let mut peak_ok = true;
    let mut inner_ok = true;
    for &t in t_grid {
        let snap = envelope(t, bp, m, p, env, n_dim)?;
        let (lhs, rhs) = ((m - 1.0) * snap.sigma, (p + m - 2.0) * snap.gamma);
        range_ok &= lhs <= rhs;
        range_margin = range_margin.min((rhs - lhs) / rhs.abs().max(1e-300));
        let (lhs, rhs) = (
            k_const * snap.sigma.max(0.0).powf(pw),
            snap.delta * snap.gamma.powf(gw),
        );
        peak_ok &= lhs <= rhs;
        peak_margin = peak_margin.min((rhs - lhs) / rhs.abs().max(1e-300));
        let (lhs, rhs) = (two_pow * (snap.sigma0 - snap.delta0), snap.gamma);
        inner_ok &= lhs <= rhs;
        inner_margin = inner_margin.min((rhs - lhs) / rhs.abs().max(1e-300));
    }
    conditions.push(ConditionCheck {
        name: "outer_range".into(),
        satisfied: range_ok,
        margin: range_margin,
        detail: "min over the grid of ((p+m−2)γ − (m−1)σ)/(p+m−2)γ".into(),
    });
    conditions.push(ConditionCheck {
        name: "outer_peak".into(),
        satisfied: peak_ok,
        margin: peak_margin,
        detail: "min over the grid of (δγ^((m−1)/(p−1)) − Kσ^((p+m−2)/(p−1)))/|δγ^((m−1)/(p−1))|".into(),
    });
    conditions.push(ConditionCheck {
        name: "inner_bound".into(),
        satisfied: inner_ok,
        margin: inner_margin,
        detail: "min over the grid of (γ − 2^((p+m−2)/(m−1))(σ₀−δ₀))/γ".into(),
    });

    // 8. Asymptotic exponent comparison: dominant θ-powers.
    //    σ, σ₀ ~ θ^{mα−β};  δ ~ θ^{mα−2β};  γ ~ θ^{pα}.
    let (alpha, beta) = (bp.alpha, bp.beta);
    let range_gap = p * alpha - (m * alpha - beta);
    let peak_gap = (m * alpha - 2.0 * beta) + p * alpha * gw - (m * alpha - beta) * pw;
    let asym_margin = range_gap.min(peak_gap);
    conditions.push(ConditionCheck {
        name: "asymptotic_exponents".into(),
        satisfied: asym_margin >= 0.0,
        margin: asym_margin,
        detail: "min of pα−(mα−β) and (mα−2β)+pα(m−1)/(p−1)−(mα−β)(p+m−2)/(p−1)".into(),
    });

    let feasible = conditions.iter().all(|c| c.satisfied);
    Ok(FeasibilityReport {
        feasible,
        conditions,
    })
}

/// Value of the manifold barrier
/// `w(r,t) = C (τ+t)^α [1 − (r/a)(τ+t)^{−β}]₊^{1/(m−1)}`.
pub fn manifold_barrier_eval(r: f64, t: f64, bp: &BarrierParams, m: f64) -> f64 {
    assert!(r >= 0.0, "radius must be nonnegative, got {r}");
    let theta = bp.t0 + t;
    let profile = 1.0 - (r / bp.a) * theta.powf(-bp.beta);
    if profile <= 0.0 {
        0.0
    } else {
        bp.c0 * theta.powf(bp.alpha) * profile.powf(1.0 / (m - 1.0))
    }
}

/// Support radius `a(τ+t)^β` of the manifold barrier.
pub fn manifold_support_radius(t: f64, bp: &BarrierParams) -> f64 {
    bp.a * (bp.t0 + t).powf(bp.beta)
}

/// Center value `C(τ+t)^α` of the manifold barrier.
pub fn manifold_center_value(t: f64, bp: &BarrierParams) -> f64 {
    bp.c0 * (bp.t0 + t).powf(bp.alpha)
}
