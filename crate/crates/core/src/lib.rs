//! Simulation and verification laboratory for slow-diffusion reaction
//! equations `ρ uₜ = Δuᵐ + ρ uᵖ` (`1 < p < m`) on radially symmetric model
//! geometries — Euclidean balls, constant-curvature hyperbolic balls, and
//! weighted Euclidean space with power-law densities.
//!
//! The crate has three layers:
//!
//! * **Simulation** ([`geometry`], [`solver`]): a monotone finite-volume
//!   scheme with implicit degenerate diffusion and explicit truncated
//!   reaction, on uniform radial grids with exact per-cell measures.
//! * **Closed-form analysis** ([`estimates`], [`barriers`],
//!   [`inequalities`]): the explicit constants, envelope functions, and
//!   barrier families that bound the evolution — Lᑫ growth rates, smoothing
//!   constants, level-set (Stampacchia-type) bounds, second-derivative
//!   (Aronson–Bénilan-type) residuals, Poincaré/Sobolev constants, and the
//!   self-similar subsolutions driving infinite-time blow-up.
//! * **Scenario harness** ([`cli`]): JSON-configured runs that put measured
//!   trajectories against the closed-form bounds and render verdicts, CSV
//!   trajectories, and JSON reports.

// Numeric validation throughout uses the negated form `!(x > 0.0)` instead
// of `x <= 0.0` so that NaN fails closed: NaN makes every comparison false,
// so the negation accepts only values that provably satisfy the condition.
// Clippy's suggested `partial_cmp` rewrite would bury that intent.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod cli;
pub mod error;
pub mod estimates;
pub mod geometry;
pub mod inequalities;
pub mod quadrature;
pub mod solver;
pub mod tridiag;

pub use error::{Error, Result};
