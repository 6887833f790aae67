//! Radially symmetric model geometries, weight families, and finite-volume grids.
//!
//! Every object in this crate lives on a rotationally symmetric space described
//! by its *sphere-area profile* `S(r)`: the surface measure of the geodesic
//! sphere of radius `r`. For radial functions the Laplace–Beltrami operator
//! reduces to
//!
//! ```text
//! Δv = v″ + (S′(r)/S(r)) v′ ,
//! ```
//!
//! and the volume measure is `dμ = S(r) dr`. Two model families are provided:
//!
//! * Euclidean space `ℝᴺ`: `S(r) = ω_N r^{N−1}`;
//! * hyperbolic space of constant curvature `−κ`:
//!   `S(r) = ω_N (sinh(√κ r)/√κ)^{N−1}`,
//!
//! where `ω_N = 2π^{N/2}/Γ(N/2)` is the area of the unit `(N−1)`-sphere.
//!
//! On Euclidean space a positive bounded density `ρ(r)` may additionally be
//! attached; it enters the evolution as `ρ uₜ = Δuᵐ + ρ uᵖ` and turns the
//! measure into `dμ_ρ = ρ S dr`. The [`Weight`] families carry certified
//! envelope constants: the inverse-square family satisfies
//! `k₁r² ≤ 1/ρ(r) ≤ k₂r²` outside the ball of radius `e_scale` and
//! `ρ₁ ≤ 1/ρ ≤ ρ₂` inside it, the bounds used by the blow-up barrier
//! construction in [`crate::barriers`].

use crate::error::{Error, Result};
use crate::quadrature;
use serde::{Deserialize, Serialize};

/// Γ(n/2) for integer `n ≥ 1`, computed exactly by the recursion
/// `Γ(x+1) = xΓ(x)` from `Γ(1/2) = √π` and `Γ(1) = 1`.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n >= 1, "gamma_half requires n >= 1");
    let mut value = if n.is_multiple_of(2) {
        1.0 // Γ(1)
    } else {
        std::f64::consts::PI.sqrt() // Γ(1/2)
    };
    let mut two_x = if n.is_multiple_of(2) { 2 } else { 1 }; // current argument, doubled
    while two_x < n {
        value *= two_x as f64 / 2.0;
        two_x += 2;
    }
    value
}

/// Area `ω_N = 2π^{N/2}/Γ(N/2)` of the unit sphere `S^{N−1} ⊂ ℝᴺ`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    assert!(dim >= 1, "dimension must be at least 1");
    2.0 * std::f64::consts::PI.powf(dim as f64 / 2.0) / gamma_half(dim)
}

/// A rotationally symmetric model geometry of dimension `N ≥ 3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialGeometry {
    /// Flat `ℝᴺ` with `S(r) = ω_N r^{N−1}`.
    Euclidean {
        /// Space dimension `N`.
        dim: usize,
    },
    /// Constant-curvature hyperbolic space `ℍᴺ_κ` (sectional curvature `−κ`)
    /// with `S(r) = ω_N (sinh(√κ r)/√κ)^{N−1}`.
    Hyperbolic {
        /// Space dimension `N`.
        dim: usize,
        /// Curvature magnitude `κ > 0`.
        kappa: f64,
    },
}

impl RadialGeometry {
    /// Space dimension `N`.
    pub fn dim(&self) -> usize {
        match *self {
            RadialGeometry::Euclidean { dim } => dim,
            RadialGeometry::Hyperbolic { dim, .. } => dim,
        }
    }

    /// Checks the structural constraints (`N ≥ 3`, `κ > 0`).
    pub fn validate(&self) -> Result<()> {
        if self.dim() < 3 {
            return Err(Error::invalid(format!(
                "geometry dimension must be >= 3, got {}",
                self.dim()
            )));
        }
        if let RadialGeometry::Hyperbolic { kappa, .. } = *self {
            if !(kappa > 0.0) || !kappa.is_finite() {
                return Err(Error::invalid(format!(
                    "hyperbolic curvature magnitude must be positive and finite, got {kappa}"
                )));
            }
        }
        Ok(())
    }

    /// Sphere-area profile `S(r)`.
    ///
    /// # Panics
    /// Panics if `r < 0`.
    pub fn sphere_area(&self, r: f64) -> f64 {
        assert!(r >= 0.0, "sphere_area requires r >= 0, got {r}");
        match *self {
            RadialGeometry::Euclidean { dim } => {
                unit_sphere_area(dim) * r.powi(dim as i32 - 1)
            }
            RadialGeometry::Hyperbolic { dim, kappa } => {
                let sk = kappa.sqrt();
                unit_sphere_area(dim) * ((sk * r).sinh() / sk).powi(dim as i32 - 1)
            }
        }
    }

    /// Radial drift `S′(r)/S(r)`, so that `Δv = v″ + (S′/S) v′` for radial `v`.
    ///
    /// Euclidean: `(N−1)/r`. Hyperbolic: `(N−1)√κ coth(√κ r)`.
    ///
    /// # Panics
    /// Panics if `r ≤ 0`; the origin is handled by the symmetry (zero-flux)
    /// boundary, never through the drift.
    pub fn drift_coefficient(&self, r: f64) -> f64 {
        assert!(r > 0.0, "drift_coefficient requires r > 0, got {r}");
        match *self {
            RadialGeometry::Euclidean { dim } => (dim as f64 - 1.0) / r,
            RadialGeometry::Hyperbolic { dim, kappa } => {
                let sk = kappa.sqrt();
                (dim as f64 - 1.0) * sk * (sk * r).cosh() / (sk * r).sinh()
            }
        }
    }

    /// Volume of the geodesic ball of radius `r`, in closed form.
    ///
    /// Euclidean: `ω_N r^N / N`. Hyperbolic: termwise integration of the
    /// binomial expansion of `sinh^{N−1}`.
    ///
    /// # Panics
    /// Panics if `r < 0`.
    pub fn ball_volume(&self, r: f64) -> f64 {
        assert!(r >= 0.0, "ball_volume requires r >= 0, got {r}");
        match *self {
            RadialGeometry::Euclidean { dim } => {
                unit_sphere_area(dim) * r.powi(dim as i32) / dim as f64
            }
            RadialGeometry::Hyperbolic { dim, kappa } => {
                let sk = kappa.sqrt();
                let q = dim - 1; // power of sinh
                // ∫₀^X sinh^q x dx with X = √κ r, via
                // sinh^q x = 2^{−q} Σ_j C(q,j) (−1)^j e^{(q−2j)x}.
                let x_top = sk * r;
                let mut integral = 0.0;
                let mut binom = 1.0f64;
                for j in 0..=q {
                    let c = (q as i64 - 2 * j as i64) as f64;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let piece = if c == 0.0 {
                        x_top
                    } else {
                        ((c * x_top).exp() - 1.0) / c
                    };
                    integral += sign * binom * piece;
                    binom *= (q - j) as f64 / (j + 1) as f64;
                }
                integral /= (2.0f64).powi(q as i32);
                unit_sphere_area(dim) * integral / sk.powi(dim as i32)
            }
        }
    }
}

/// A positive bounded density `ρ(r)` on Euclidean space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `ρ ≡ 1` (the unweighted problem).
    Unit,
    /// `ρ(r) = s²/(r² + s²)` with `s = e_scale`; decays like `s²/r²`.
    ///
    /// Its reciprocal satisfies the quadratic envelope
    /// `r²/s² ≤ 1/ρ ≤ 2r²/s²` for `r ≥ s` and `1 ≤ 1/ρ ≤ 2` for `r < s`.
    InverseSquare {
        /// Length scale `s > 0`; defaults to Euler's number `e`, the scale at
        /// which the envelope seam matches the barrier construction.
        #[serde(default = "default_e_scale")]
        e_scale: f64,
    },
    /// `ρ(r) = (1 + r²)^{−a/2}`; integrable over `ℝᴺ` exactly when `a > N`.
    Integrable {
        /// Decay exponent `a > N`.
        a_exp: f64,
    },
}

fn default_e_scale() -> f64 {
    std::f64::consts::E
}

/// Certified two-sided bounds on the *reciprocal* density `1/ρ`:
/// `k1·r² ≤ 1/ρ(r) ≤ k2·r²` for `r ≥ seam` and `rho1 ≤ 1/ρ(r) ≤ rho2` for
/// `r < seam`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEnvelope {
    /// Lower quadratic constant (`k1 r² ≤ 1/ρ` outside the seam).
    pub k1: f64,
    /// Upper quadratic constant (`1/ρ ≤ k2 r²` outside the seam).
    pub k2: f64,
    /// Lower bound of `1/ρ` inside the seam ball.
    pub rho1: f64,
    /// Upper bound of `1/ρ` inside the seam ball.
    pub rho2: f64,
    /// Radius separating the two regimes.
    pub seam: f64,
}

impl Weight {
    /// Density value `ρ(r)`.
    ///
    /// # Panics
    /// Panics if `r < 0`.
    pub fn eval(&self, r: f64) -> f64 {
        assert!(r >= 0.0, "weight evaluation requires r >= 0, got {r}");
        match *self {
            Weight::Unit => 1.0,
            Weight::InverseSquare { e_scale } => {
                e_scale * e_scale / (r * r + e_scale * e_scale)
            }
            Weight::Integrable { a_exp } => (1.0 + r * r).powf(-a_exp / 2.0),
        }
    }

    /// Checks the structural constraints relative to a space dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            Weight::Unit => Ok(()),
            Weight::InverseSquare { e_scale } => {
                if !(e_scale > 0.0) || !e_scale.is_finite() {
                    Err(Error::invalid(format!(
                        "inverse-square weight scale must be positive and finite, got {e_scale}"
                    )))
                } else {
                    Ok(())
                }
            }
            Weight::Integrable { a_exp } => {
                if !(a_exp > dim as f64) {
                    Err(Error::invalid(format!(
                        "integrable weight requires decay exponent > dimension ({dim}), got {a_exp}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The quadratic reciprocal envelope, available for the inverse-square
    /// family only (`1/ρ = 1 + r²/s²` makes the four constants exact).
    pub fn envelope(&self) -> Option<WeightEnvelope> {
        match *self {
            Weight::InverseSquare { e_scale } => Some(WeightEnvelope {
                k1: 1.0 / (e_scale * e_scale),
                k2: 2.0 / (e_scale * e_scale),
                rho1: 1.0,
                rho2: 2.0,
                seam: e_scale,
            }),
            _ => None,
        }
    }

    /// `∫_{B_R} ρ dx = ∫₀^R ρ(r) ω_N r^{N−1} dr` in Euclidean `ℝᴺ`.
    ///
    /// `r_outer = ∞` is accepted for the integrable family only, where the
    /// closed form `ω_N Γ(N/2) Γ((a−N)/2) / (2 Γ(a/2))` applies; the other
    /// families have infinite total mass.
    pub fn total_mass(&self, dim: usize, r_outer: f64) -> Result<f64> {
        if r_outer < 0.0 {
            return Err(Error::invalid(format!(
                "total mass requires a nonnegative radius, got {r_outer}"
            )));
        }
        self.validate(dim)?;
        if r_outer.is_infinite() {
            return match *self {
                Weight::Integrable { a_exp } => {
                    let n = dim as f64;
                    Ok(unit_sphere_area(dim) * gamma_half(dim)
                        * libm::tgamma((a_exp - n) / 2.0)
                        / (2.0 * libm::tgamma(a_exp / 2.0)))
                }
                _ => Err(Error::invalid(
                    "total mass over the whole space is finite only for the integrable family",
                )),
            };
        }
        if r_outer == 0.0 {
            return Ok(0.0);
        }
        let omega = unit_sphere_area(dim);
        let w = *self;
        let panels = 256.max((4.0 * r_outer.ceil()) as usize);
        Ok(quadrature::integrate_panels(0.0, r_outer, panels, |r| {
            w.eval(r) * omega * r.powi(dim as i32 - 1)
        }))
    }
}

/// A uniform finite-volume grid on `[0, R]` with precomputed geometric cell
/// volumes `V_i = ∫_cell S dr` and measure weights `w_i = ∫_cell ρ S dr`
/// (5-point Gauss–Legendre per cell).
#[derive(Clone, Debug)]
pub struct Grid {
    /// Cell faces `r_{i±1/2}`, strictly increasing from `0` to `R` (`n+1` values).
    pub faces: Vec<f64>,
    /// Cell centers (`n` values).
    pub centers: Vec<f64>,
    /// Sphere area `S` evaluated at each face (`n+1` values; `face_area[0] = 0`).
    pub face_area: Vec<f64>,
    /// Geometric cell volumes `V_i > 0`.
    pub cell_volume: Vec<f64>,
    /// Weighted cell masses `w_i > 0`.
    pub cell_weight: Vec<f64>,
}

impl Grid {
    /// Builds the grid for a geometry/weight pair.
    pub fn build(geom: &RadialGeometry, weight: &Weight, r_outer: f64, n: usize) -> Result<Grid> {
        geom.validate()?;
        weight.validate(geom.dim())?;
        if !(r_outer > 0.0) || !r_outer.is_finite() {
            return Err(Error::invalid(format!(
                "grid outer radius must be positive and finite, got {r_outer}"
            )));
        }
        if n < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 cells, got {n}")));
        }
        let dr = r_outer / n as f64;
        let faces: Vec<f64> = (0..=n)
            .map(|i| if i == n { r_outer } else { i as f64 * dr })
            .collect();
        let centers: Vec<f64> = (0..n).map(|i| 0.5 * (faces[i] + faces[i + 1])).collect();
        let face_area: Vec<f64> = faces.iter().map(|&r| geom.sphere_area(r)).collect();
        let mut cell_volume = Vec::with_capacity(n);
        let mut cell_weight = Vec::with_capacity(n);
        for i in 0..n {
            let (lo, hi) = (faces[i], faces[i + 1]);
            let v = quadrature::integrate(lo, hi, |r| geom.sphere_area(r));
            let w = quadrature::integrate(lo, hi, |r| weight.eval(r) * geom.sphere_area(r));
            if !(v > 0.0) || !(w > 0.0) {
                return Err(Error::invalid(format!(
                    "degenerate cell {i}: volume {v}, weight {w}"
                )));
            }
            cell_volume.push(v);
            cell_weight.push(w);
        }
        Ok(Grid {
            faces,
            centers,
            face_area,
            cell_volume,
            cell_weight,
        })
    }

    /// Number of cells.
    pub fn n(&self) -> usize {
        self.centers.len()
    }

    /// Uniform cell spacing.
    pub fn dr(&self) -> f64 {
        self.faces[1] - self.faces[0]
    }

    /// Outer radius.
    pub fn r_outer(&self) -> f64 {
        *self.faces.last().expect("grid has faces")
    }

    /// `Σ V_i`, the geometric volume of the ball.
    pub fn total_volume(&self) -> f64 {
        self.cell_volume.iter().sum()
    }

    /// `Σ w_i`, the weighted measure of the ball.
    pub fn total_weight(&self) -> f64 {
        self.cell_weight.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const EUC3: RadialGeometry = RadialGeometry::Euclidean { dim: 3 };
    const HYP3: RadialGeometry = RadialGeometry::Hyperbolic { dim: 3, kappa: 1.0 };

    #[test]
    fn unit_sphere_areas_match_closed_forms() {
        // ω₂ = 2π (circle), ω₃ = 4π, ω₄ = 2π², ω₅ = 8π²/3.
        let pi = std::f64::consts::PI;
        assert_relative_eq!(unit_sphere_area(2), 2.0 * pi, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * pi, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * pi * pi, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(5), 8.0 * pi * pi / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn sphere_area_oracles() {
        let pi = std::f64::consts::PI;
        // Unit sphere in ℝ³.
        assert_relative_eq!(EUC3.sphere_area(1.0), 4.0 * pi, max_relative = 1e-14);
        // Degenerate sphere at the pole.
        assert_eq!(HYP3.sphere_area(0.0), 0.0);
        // Hyperbolic sphere of radius 1: 4π sinh²(1).
        let sh1 = 1.0f64.sinh();
        assert_relative_eq!(
            HYP3.sphere_area(1.0),
            4.0 * pi * sh1 * sh1,
            max_relative = 1e-14
        );
        assert_relative_eq!(HYP3.sphere_area(1.0), 17.355387, max_relative = 1e-6);
    }

    #[test]
    fn drift_oracles() {
        // Euclidean: (N−1)/r.
        assert_relative_eq!(EUC3.drift_coefficient(2.0), 1.0, max_relative = 1e-14);
        // Hyperbolic at r = 1: 2 coth(1) = 2 cosh(1)/sinh(1).
        let expect = 2.0 * 1.0f64.cosh() / 1.0f64.sinh();
        assert_relative_eq!(HYP3.drift_coefficient(1.0), expect, max_relative = 1e-14);
        assert_relative_eq!(HYP3.drift_coefficient(1.0), 2.626070570998663, max_relative = 1e-12);
        // Large radius: coth → 1; the drift tends to (N−1)√κ = 2.
        assert_relative_eq!(HYP3.drift_coefficient(40.0), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn drift_matches_numerical_log_derivative() {
        // S′/S ≈ d/dr log S by central differences, for both kinds and
        // several curvatures.
        let geoms = [
            RadialGeometry::Euclidean { dim: 4 },
            RadialGeometry::Hyperbolic { dim: 3, kappa: 0.5 },
            RadialGeometry::Hyperbolic { dim: 5, kappa: 2.0 },
        ];
        for geom in geoms {
            for &r in &[0.3, 1.0, 2.7] {
                let h = 1e-6;
                let numeric =
                    (geom.sphere_area(r + h).ln() - geom.sphere_area(r - h).ln()) / (2.0 * h);
                assert_relative_eq!(
                    geom.drift_coefficient(r),
                    numeric,
                    max_relative = 1e-8
                );
            }
        }
    }

    #[test]
    fn ball_volume_closed_forms() {
        let pi = std::f64::consts::PI;
        // vol(B₁ ⊂ ℝ³) = 4π/3.
        assert_relative_eq!(EUC3.ball_volume(1.0), 4.0 * pi / 3.0, max_relative = 1e-14);
        // Hyperbolic N = 3, κ = 1: V(r) = π (sinh 2r − 2r).
        for &r in &[0.5, 1.0, 3.0] {
            assert_relative_eq!(
                HYP3.ball_volume(r),
                pi * ((2.0 * r).sinh() - 2.0 * r),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn ball_volume_agrees_with_quadrature() {
        let geoms = [
            EUC3,
            RadialGeometry::Euclidean { dim: 5 },
            HYP3,
            RadialGeometry::Hyperbolic { dim: 4, kappa: 0.7 },
        ];
        for geom in geoms {
            for &r in &[0.25, 1.0, 4.0] {
                let numeric =
                    quadrature::integrate_panels(0.0, r, 200, |x| geom.sphere_area(x));
                assert_relative_eq!(geom.ball_volume(r), numeric, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn weight_values_and_envelope_constants() {
        let e = std::f64::consts::E;
        let w = Weight::InverseSquare { e_scale: e };
        // ρ(0) = 1 and ρ(e) = 1/2.
        assert_relative_eq!(w.eval(0.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(w.eval(e), 0.5, max_relative = 1e-15);
        let env = w.envelope().expect("inverse-square has an envelope");
        assert_relative_eq!(env.k1, 1.0 / (e * e), max_relative = 1e-15);
        assert_relative_eq!(env.k2, 2.0 / (e * e), max_relative = 1e-15);
        assert_eq!(env.rho1, 1.0);
        assert_eq!(env.rho2, 2.0);
        assert_eq!(env.seam, e);
        assert!(Weight::Unit.envelope().is_none());
        assert!(Weight::Integrable { a_exp: 4.0 }.envelope().is_none());
    }

    #[test]
    fn envelope_inequalities_hold_on_dense_sampling() {
        // k₁r² ≤ 1/ρ ≤ k₂r² on [seam, 100·seam]; ρ₁ ≤ 1/ρ ≤ ρ₂ inside.
        let e = std::f64::consts::E;
        let w = Weight::InverseSquare { e_scale: e };
        let env = w.envelope().unwrap();
        let samples = 100_000;
        for i in 0..samples {
            let r = env.seam * (1.0 + 99.0 * i as f64 / (samples - 1) as f64);
            let recip = 1.0 / w.eval(r);
            assert!(env.k1 * r * r <= recip * (1.0 + 1e-14), "lower envelope at r={r}");
            assert!(recip <= env.k2 * r * r * (1.0 + 1e-14), "upper envelope at r={r}");
        }
        for i in 0..samples {
            let r = env.seam * i as f64 / samples as f64;
            let recip = 1.0 / w.eval(r);
            assert!(env.rho1 <= recip * (1.0 + 1e-14), "inner lower at r={r}");
            assert!(recip <= env.rho2 * (1.0 + 1e-14), "inner upper at r={r}");
        }
    }

    #[test]
    fn integrable_total_mass_closed_form_oracle() {
        // ∫_{ℝ³} (1+r²)^{−2} dx = 4π ∫₀^∞ r²/(1+r²)² dr = 4π·(π/4) = π².
        let w = Weight::Integrable { a_exp: 4.0 };
        let pi = std::f64::consts::PI;
        let mass = w.total_mass(3, f64::INFINITY).unwrap();
        assert_relative_eq!(mass, pi * pi, max_relative = 1e-12);
        // Finite radii converge towards the closed form from below.
        let m10 = w.total_mass(3, 10.0).unwrap();
        let m100 = w.total_mass(3, 100.0).unwrap();
        assert!(m10 < m100 && m100 < mass);
        assert!(mass - m100 < 0.13, "tail at R=100 should be ~4π/100");
    }

    #[test]
    fn unit_weight_total_mass_is_ball_volume() {
        let mass = Weight::Unit.total_mass(3, 1.0).unwrap();
        assert_relative_eq!(mass, 4.0 * std::f64::consts::PI / 3.0, max_relative = 1e-10);
        assert_eq!(Weight::Integrable { a_exp: 4.0 }.total_mass(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn non_integrable_mass_over_whole_space_is_rejected() {
        assert!(Weight::Unit.total_mass(3, f64::INFINITY).is_err());
        let w = Weight::InverseSquare { e_scale: 1.0 };
        assert!(w.total_mass(3, f64::INFINITY).is_err());
        // a ≤ N is rejected outright.
        let bad = Weight::Integrable { a_exp: 3.0 };
        assert!(bad.total_mass(3, 1.0).is_err());
    }

    #[test]
    fn grid_volumes_sum_to_ball_volume() {
        for geom in [EUC3, HYP3] {
            let grid = Grid::build(&geom, &Weight::Unit, 5.0, 400).unwrap();
            assert_relative_eq!(
                grid.total_volume(),
                geom.ball_volume(5.0),
                max_relative = 1e-10
            );
            assert_eq!(grid.faces[0], 0.0);
            assert_eq!(grid.r_outer(), 5.0);
            assert!(grid.cell_volume.iter().all(|&v| v > 0.0));
            assert!(grid.cell_weight.iter().all(|&w| w > 0.0));
            let increasing = grid.faces.windows(2).all(|f| f[1] > f[0]);
            assert!(increasing, "faces must increase strictly");
        }
    }

    #[test]
    fn grid_weights_match_total_mass_quadrature() {
        // Measure consistency between the per-cell quadrature and the global
        // quadrature of the same integrand.
        let w = Weight::Integrable { a_exp: 4.0 };
        let grid = Grid::build(&EUC3, &w, 8.0, 500).unwrap();
        let direct = w.total_mass(3, 8.0).unwrap();
        assert_relative_eq!(grid.total_weight(), direct, max_relative = 1e-8);
    }

    #[test]
    fn grid_rejects_degenerate_requests() {
        assert!(Grid::build(&EUC3, &Weight::Unit, 0.0, 10).is_err());
        assert!(Grid::build(&EUC3, &Weight::Unit, 1.0, 1).is_err());
        let bad_geom = RadialGeometry::Euclidean { dim: 2 };
        assert!(Grid::build(&bad_geom, &Weight::Unit, 1.0, 10).is_err());
        let bad_kappa = RadialGeometry::Hyperbolic { dim: 3, kappa: 0.0 };
        assert!(Grid::build(&bad_kappa, &Weight::Unit, 1.0, 10).is_err());
    }
}
