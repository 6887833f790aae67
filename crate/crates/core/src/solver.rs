//! Finite-volume solver for the slow-diffusion reaction equation
//!
//! ```text
//! ρ uₜ = Δ uᵐ + ρ Tₖ(uᵖ)   on B_R,   u = 0 on ∂B_R,   u(·,0) = u₀ ≥ 0,
//! ```
//!
//! with `m > 1` (degenerate slow diffusion), `1 < p < m` (subcritical
//! reaction), and `Tₖ(s) = min(s, k)` the reaction truncation (`k = ∞`
//! allowed). On unweighted geometries `ρ ≡ 1`.
//!
//! Space is discretized by a conservative finite-volume scheme on the uniform
//! radial grid of [`crate::geometry::Grid`]: fluxes `S·∂(uᵐ)/∂r` through cell
//! faces, divided by weighted cell masses `wᵢ = ∫ ρ S dr`. The origin carries
//! the natural zero-flux condition (`S(0) = 0`), the outer boundary a
//! homogeneous Dirichlet ghost value.
//!
//! Time is advanced by implicit Euler in the diffusion with an explicit,
//! frozen truncated reaction:
//!
//! ```text
//! (zᵢ − uᵢ)/dt = (1/wᵢ) Σ_faces ± S (zᵐ)′ + Tₖ(uᵢᵖ) ,
//! ```
//!
//! solved by a damped Newton iteration on the tridiagonal Jacobian
//! `I + dt·W⁻¹·A·diag(m z^{m−1} + 10⁻¹²)` (the additive regularization keeps
//! the Jacobian safely nonsingular at degenerate points where `z = 0`).
//! A step that fails to converge is retried with half the substep, down to a
//! hard floor below which [`crate::error::Error::TimeStepUnderflow`] is
//! raised.
//!
//! The scheme is *monotone*: the implicit diffusion matrix is an M-matrix and
//! the explicit reaction map `u ↦ u + dt·Tₖ(uᵖ)` is nondecreasing, so
//! discrete solutions respect comparison — larger data, larger truncation
//! levels, and larger domains (with aligned cells) give pointwise larger
//! solutions. [`ladder_check`] measures violations of these order relations.

use crate::error::{Error, Result};
use crate::geometry::{Grid, RadialGeometry, Weight};
use crate::tridiag::Tridiagonal;
use serde::{Deserialize, Serialize};
use std::io::Write as IoWrite;

/// Hard default floor for substep halving when none is configured.
pub const DEFAULT_DT_MIN: f64 = 1e-12;

/// Newton iteration limit per implicit substep.
const NEWTON_MAX_ITERS: usize = 60;

/// Relative Newton residual tolerance (scaled by the data magnitude).
const NEWTON_TOL: f64 = 1e-12;

/// Additive Jacobian regularization at degenerate points.
const JACOBIAN_REG: f64 = 1e-12;

/// Physical and structural parameters of one evolution problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Diffusion exponent `m > 1`.
    pub m: f64,
    /// Reaction exponent `p` with `1 < p < m` (ignored when `reaction` is off).
    pub p: f64,
    /// Reaction truncation level `k`; `None` means untruncated (`k = ∞`).
    pub k_trunc: Option<f64>,
    /// Whether the reaction term is present at all.
    pub reaction: bool,
    /// Underlying model geometry.
    pub geom: RadialGeometry,
    /// Density `ρ` (must be [`Weight::Unit`] on hyperbolic geometries).
    pub weight: Weight,
    /// Domain radius `R`.
    pub r_outer: f64,
}

impl ModelParams {
    /// Checks the slow-diffusion parameter range and structural consistency.
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 1.0) || !self.m.is_finite() {
            return Err(Error::invalid(format!(
                "diffusion exponent must satisfy m > 1, got {}",
                self.m
            )));
        }
        if self.reaction && !(1.0 < self.p && self.p < self.m) {
            return Err(Error::invalid(format!(
                "reaction exponent must satisfy 1 < p < m, got p = {}, m = {}",
                self.p, self.m
            )));
        }
        if let Some(k) = self.k_trunc {
            if !(k > 0.0) {
                return Err(Error::invalid(format!(
                    "truncation level must be positive, got {k}"
                )));
            }
        }
        self.geom.validate()?;
        self.weight.validate(self.geom.dim())?;
        if matches!(self.geom, RadialGeometry::Hyperbolic { .. })
            && self.weight != Weight::Unit
        {
            return Err(Error::invalid(
                "densities are supported on Euclidean geometry only; use the unit weight on hyperbolic space",
            ));
        }
        if !(self.r_outer > 0.0) || !self.r_outer.is_finite() {
            return Err(Error::invalid(format!(
                "domain radius must be positive and finite, got {}",
                self.r_outer
            )));
        }
        Ok(())
    }

    /// Builds the matching grid with `n` cells.
    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::build(&self.geom, &self.weight, self.r_outer, n)
    }
}

/// The reaction truncation `Tₖ(x) = min(x, k)` for nonnegative arguments.
///
/// For `x < k` the value is returned unchanged (bit-for-bit), which makes runs
/// with a truncation level above the solution range exactly reproduce the
/// untruncated dynamics.
#[inline]
pub fn truncate(x: f64, k: f64) -> f64 {
    x.min(k)
}

/// `x^e` with fast paths for the common square/identity exponents.
#[inline]
fn fpow(x: f64, e: f64) -> f64 {
    if e == 2.0 {
        x * x
    } else if e == 1.0 {
        x
    } else {
        x.powf(e)
    }
}

/// One time level of the discrete solution.
#[derive(Clone, Debug)]
pub struct State {
    /// Current time.
    pub t: f64,
    /// Cell-centered values, aligned with [`Grid::centers`].
    pub u: Vec<f64>,
}

impl State {
    /// Initial state at `t = 0` from a datum sampled at cell centers.
    pub fn initial(grid: &Grid, datum: &[f64]) -> Result<State> {
        if datum.len() != grid.n() {
            return Err(Error::invalid(format!(
                "datum has {} values for a grid of {} cells",
                datum.len(),
                grid.n()
            )));
        }
        if datum.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "datum must be nonnegative and finite in every cell",
            ));
        }
        Ok(State {
            t: 0.0,
            u: datum.to_vec(),
        })
    }
}

/// Geometric discrete Laplacian `(Lv)ᵢ = (1/Vᵢ)[S_{i+1/2}(v_{i+1}−v_i)/Δr − S_{i−1/2}(v_i−v_{i−1})/Δr]`
/// with the natural zero-flux origin (`S(0) = 0`) and a homogeneous Dirichlet
/// ghost value beyond the outer face.
pub fn discrete_laplacian(grid: &Grid, v: &[f64]) -> Vec<f64> {
    flux_divergence(grid, v, &grid.cell_volume)
}

/// Weighted discrete diffusion operator `(1/wᵢ)·(flux divergence)`; coincides
/// with [`discrete_laplacian`] for the unit weight.
pub fn weighted_laplacian(grid: &Grid, v: &[f64]) -> Vec<f64> {
    flux_divergence(grid, v, &grid.cell_weight)
}

fn flux_divergence(grid: &Grid, v: &[f64], measure: &[f64]) -> Vec<f64> {
    let n = grid.n();
    assert_eq!(v.len(), n, "profile length must match the grid");
    let dr = grid.dr();
    let mut out = vec![0.0; n];
    for i in 0..n {
        // Flux through the outer face of cell i (ghost value 0 beyond R).
        let outer = if i + 1 < n {
            grid.face_area[i + 1] * (v[i + 1] - v[i]) / dr
        } else {
            grid.face_area[n] * (0.0 - v[i]) / dr
        };
        // Flux through the inner face (vanishes at the origin, S(0) = 0).
        let inner = if i > 0 {
            grid.face_area[i] * (v[i] - v[i - 1]) / dr
        } else {
            0.0
        };
        out[i] = (outer - inner) / measure[i];
    }
    out
}

/// Weighted Lᑫ norm `(Σ wᵢ |uᵢ|^q)^{1/q}`; `q = ∞` gives the max norm.
pub fn lq_norm(grid: &Grid, u: &[f64], q: f64) -> Result<f64> {
    if u.len() != grid.n() {
        return Err(Error::invalid(format!(
            "profile has {} values for a grid of {} cells",
            u.len(),
            grid.n()
        )));
    }
    if q.is_infinite() && q > 0.0 {
        return Ok(u.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())));
    }
    if !(q >= 1.0) {
        return Err(Error::invalid(format!(
            "norm exponent must satisfy q >= 1 (or q = inf), got {q}"
        )));
    }
    let mut sum = 0.0;
    for (w, &v) in grid.cell_weight.iter().zip(u) {
        sum += w * fpow(v.abs(), q);
    }
    Ok(fpow(sum, 1.0 / q))
}

/// Geometric (unweighted) mass `Σ Vᵢ uᵢ`.
pub fn geometric_mass(grid: &Grid, u: &[f64]) -> f64 {
    grid.cell_volume.iter().zip(u).map(|(v, &x)| v * x).sum()
}

/// Attempts one implicit substep of size `dt` from `u_old`; `Err` means the
/// Newton iteration stalled and the caller should retry with a smaller `dt`.
fn implicit_substep(
    params: &ModelParams,
    grid: &Grid,
    u_old: &[f64],
    dt: f64,
) -> Result<Vec<f64>> {
    let n = grid.n();
    let dr = grid.dr();
    let m = params.m;

    // Explicit truncated reaction, frozen at the old time level.
    let mut b = u_old.to_vec();
    if params.reaction {
        let k = params.k_trunc.unwrap_or(f64::INFINITY);
        for (bi, &ui) in b.iter_mut().zip(u_old) {
            *bi += dt * truncate(fpow(ui, params.p), k);
        }
    }
    let scale = b.iter().fold(1.0f64, |acc, &v| acc.max(v.abs()));

    let mut z: Vec<f64> = b.iter().map(|&v| v.max(0.0)).collect();
    let mut jac = Tridiagonal::zeros(n);
    let mut residual = vec![0.0; n];

    for _ in 0..NEWTON_MAX_ITERS {
        // Residual F(z) = z − dt·W⁻¹·fluxdiv(zᵐ) − b.  Convergence is judged
        // row by row against the size of the operands that formed the row:
        // where the flux terms are large (steep fronts on strongly weighted
        // cells) the subtraction has a cancellation floor of machine epsilon
        // times the operand size, and an absolute test below that floor can
        // never be met no matter how many iterations run.
        let zm: Vec<f64> = z.iter().map(|&v| fpow(v, m)).collect();
        let mut worst_excess = f64::NEG_INFINITY;
        let mut all_finite = true;
        for i in 0..n {
            let outer = if i + 1 < n {
                grid.face_area[i + 1] * (zm[i + 1] - zm[i]) / dr
            } else {
                grid.face_area[n] * (0.0 - zm[i]) / dr
            };
            let inner = if i > 0 {
                grid.face_area[i] * (zm[i] - zm[i - 1]) / dr
            } else {
                0.0
            };
            let f = z[i] - dt * (outer - inner) / grid.cell_weight[i] - b[i];
            residual[i] = f;
            all_finite &= f.is_finite();
            let row_mag = z[i].abs()
                + b[i].abs()
                + dt * (outer.abs() + inner.abs()) / grid.cell_weight[i];
            worst_excess = worst_excess.max(f.abs() - NEWTON_TOL * (row_mag + scale));
        }
        if !all_finite {
            return Err(Error::invalid("Newton residual became non-finite"));
        }
        if worst_excess <= 0.0 {
            return Ok(z);
        }

        // Tridiagonal Jacobian with regularized degenerate derivative.
        for i in 0..n {
            let c = dt / (grid.cell_weight[i] * dr);
            let dz_i = m * fpow(z[i], m - 1.0) + JACOBIAN_REG;
            let area_out = if i + 1 < n {
                grid.face_area[i + 1]
            } else {
                grid.face_area[n]
            };
            jac.diag[i] = 1.0 + c * (area_out + grid.face_area[i]) * dz_i;
            if i > 0 {
                let dz_prev = m * fpow(z[i - 1], m - 1.0) + JACOBIAN_REG;
                jac.lower[i] = -c * grid.face_area[i] * dz_prev;
            }
            if i + 1 < n {
                let dz_next = m * fpow(z[i + 1], m - 1.0) + JACOBIAN_REG;
                jac.upper[i] = -c * grid.face_area[i + 1] * dz_next;
            }
        }
        for r in residual.iter_mut() {
            *r = -*r;
        }
        let delta = jac.solve(&residual)?;
        for i in 0..n {
            z[i] = (z[i] + delta[i]).max(0.0);
        }
    }
    Err(Error::invalid(format!(
        "Newton iteration stalled after {NEWTON_MAX_ITERS} iterations at dt = {dt:e}"
    )))
}

/// Advances the state by exactly `dt`, halving the internal substep on Newton
/// failures down to the floor `dt_min`.
pub fn step_with_floor(
    params: &ModelParams,
    grid: &Grid,
    state: &State,
    dt: f64,
    dt_min: f64,
) -> Result<State> {
    params.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("step size must be positive, got {dt}")));
    }
    if state.u.len() != grid.n() {
        return Err(Error::invalid(format!(
            "state has {} values for a grid of {} cells",
            state.u.len(),
            grid.n()
        )));
    }
    let mut u = state.u.clone();
    let mut remaining = dt;
    let mut sub = dt;
    while remaining > 0.0 {
        let attempt = sub.min(remaining);
        match implicit_substep(params, grid, &u, attempt) {
            Ok(z) => {
                u = z;
                remaining -= attempt;
                sub = (sub * 2.0).min(dt);
            }
            Err(err) => {
                sub = attempt / 2.0;
                if sub < dt_min {
                    return Err(Error::TimeStepUnderflow {
                        t: state.t + (dt - remaining),
                        dt: attempt,
                        dt_min,
                        detail: err.to_string(),
                    });
                }
            }
        }
    }
    Ok(State {
        t: state.t + dt,
        u,
    })
}

/// Advances the state by exactly `dt` with the default substep floor.
pub fn step(params: &ModelParams, grid: &Grid, state: &State, dt: f64) -> Result<State> {
    step_with_floor(params, grid, state, dt, DEFAULT_DT_MIN)
}

/// Time-stepping and recording plan for a full run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSchedule {
    /// Checkpoint times, strictly increasing; the run ends at the last one.
    /// A leading `0.0` records the datum itself.
    pub checkpoints: Vec<f64>,
    /// First step size (the schedule grows geometrically from here, so small
    /// values resolve the initial layer).
    pub dt_init: f64,
    /// Upper bound for the step size.
    pub dt_max: f64,
    /// Hard floor below which halving gives up.
    pub dt_min: f64,
    /// Geometric growth factor per accepted step (`> 1`).
    pub growth: f64,
    /// Norm exponent for the recorded `lq` column; `None` records `q = m`.
    pub q_record: Option<f64>,
}

impl TimeSchedule {
    /// A reasonable default schedule for a run up to `t_end` with `count`
    /// logarithmically spaced checkpoints starting at `t_first`, plus the
    /// datum checkpoint at `t = 0`.
    pub fn log_spaced(t_first: f64, t_end: f64, count: usize) -> TimeSchedule {
        assert!(t_first > 0.0 && t_end > t_first && count >= 2);
        let mut checkpoints = vec![0.0];
        let lf = t_first.ln();
        let le = t_end.ln();
        for i in 0..count {
            let x = lf + (le - lf) * i as f64 / (count - 1) as f64;
            checkpoints.push(x.exp());
        }
        // Land exactly on t_end despite rounding.
        *checkpoints.last_mut().expect("nonempty") = t_end;
        TimeSchedule {
            checkpoints,
            dt_init: 1e-5,
            dt_max: t_end / 200.0,
            dt_min: DEFAULT_DT_MIN,
            growth: 1.2,
            q_record: None,
        }
    }

    /// Checks monotonicity and positivity of the plan.
    pub fn validate(&self) -> Result<()> {
        if self.checkpoints.is_empty() {
            return Err(Error::invalid("schedule needs at least one checkpoint"));
        }
        if self.checkpoints[0] < 0.0 {
            return Err(Error::invalid("checkpoints must be nonnegative"));
        }
        if self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("checkpoints must increase strictly"));
        }
        for (name, v) in [
            ("dt_init", self.dt_init),
            ("dt_max", self.dt_max),
            ("dt_min", self.dt_min),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.growth > 1.0) {
            return Err(Error::invalid(format!(
                "step growth factor must exceed 1, got {}",
                self.growth
            )));
        }
        if let Some(q) = self.q_record {
            if !(q >= 1.0) {
                return Err(Error::invalid(format!(
                    "recorded norm exponent must be >= 1, got {q}"
                )));
            }
        }
        Ok(())
    }
}

/// Norms of the solution at one checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Checkpoint time.
    pub t: f64,
    /// Weighted L¹ norm.
    pub l1: f64,
    /// Weighted Lᑫ norm for the recorded exponent.
    pub lq: f64,
    /// Weighted Lᵐ norm.
    pub lm: f64,
    /// Max norm.
    pub linf: f64,
}

/// A completed run: checkpoint norms plus the full profiles at each
/// checkpoint.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// The exponent recorded in the `lq` column.
    pub q_recorded: f64,
    /// Norms at each checkpoint, in time order.
    pub checkpoints: Vec<Checkpoint>,
    /// `(t, profile)` pairs matching `checkpoints`.
    pub profiles: Vec<(f64, Vec<f64>)>,
}

impl Trajectory {
    /// Writes the norm history as CSV (`t,l1,lq,lm,linf`), with deterministic
    /// scientific formatting.
    pub fn write_csv<W: IoWrite>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "t,l1,lq,lm,linf")?;
        for c in &self.checkpoints {
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                c.t, c.l1, c.lq, c.lm, c.linf
            )?;
        }
        Ok(())
    }

    /// Writes one stored profile as CSV (`r,u`).
    pub fn write_profile_csv<W: IoWrite>(&self, out: &mut W, grid: &Grid, index: usize) -> Result<()> {
        let (_, u) = self
            .profiles
            .get(index)
            .ok_or_else(|| Error::invalid(format!("no stored profile at index {index}")))?;
        writeln!(out, "r,u")?;
        for (r, v) in grid.centers.iter().zip(u) {
            writeln!(out, "{r:.12e},{v:.12e}")?;
        }
        Ok(())
    }
}

/// Runs the full evolution, recording norms and profiles at every checkpoint.
pub fn solve(
    params: &ModelParams,
    grid: &Grid,
    datum: &[f64],
    schedule: &TimeSchedule,
) -> Result<Trajectory> {
    params.validate()?;
    schedule.validate()?;
    let mut state = State::initial(grid, datum)?;
    let q = schedule.q_record.unwrap_or(params.m);

    let mut checkpoints = Vec::with_capacity(schedule.checkpoints.len());
    let mut profiles = Vec::with_capacity(schedule.checkpoints.len());
    let mut record = |state: &State| -> Result<()> {
        checkpoints.push(Checkpoint {
            t: state.t,
            l1: lq_norm(grid, &state.u, 1.0)?,
            lq: lq_norm(grid, &state.u, q)?,
            lm: lq_norm(grid, &state.u, params.m)?,
            linf: lq_norm(grid, &state.u, f64::INFINITY)?,
        });
        profiles.push((state.t, state.u.clone()));
        Ok(())
    };

    let mut dt = schedule.dt_init.min(schedule.dt_max);
    for &cp in &schedule.checkpoints {
        if cp == 0.0 {
            record(&state)?;
            continue;
        }
        while state.t < cp {
            let remaining = cp - state.t;
            let lands = dt >= remaining;
            let dt_eff = if lands { remaining } else { dt };
            state = step_with_floor(params, grid, &state, dt_eff, schedule.dt_min)?;
            if lands {
                state.t = cp; // snap exactly onto the checkpoint
            }
            dt = (dt * schedule.growth).min(schedule.dt_max);
        }
        record(&state)?;
    }
    Ok(Trajectory {
        q_recorded: q,
        checkpoints,
        profiles,
    })
}

/// Truncation levels, domain radii, and datum caps for the monotonicity
/// ladder. `None` entries mean "infinite" (untruncated / uncapped) and must
/// come last.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderPlan {
    /// Increasing truncation levels; `None` = untruncated.
    pub k_levels: Vec<Option<f64>>,
    /// Increasing domain radii, each commensurate with the base spacing.
    pub r_values: Vec<f64>,
    /// Increasing datum caps; `None` = uncapped.
    pub h_caps: Vec<Option<f64>>,
}

/// Worst pointwise violations of the three comparison ladders.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// `max (u_{k_small} − u_{k_large})₊` over shared checkpoints and cells.
    pub k_violation: f64,
    /// `max (u_{R_small} − u_{R_large})₊` over the smaller domain's cells.
    pub r_violation: f64,
    /// `max (u_{h_small} − u_{h_large})₊` over shared checkpoints and cells.
    pub h_violation: f64,
}

fn max_excess(lower_run: &Trajectory, upper_run: &Trajectory, cells: usize) -> f64 {
    let mut worst = 0.0f64;
    for ((_, lo), (_, hi)) in lower_run.profiles.iter().zip(&upper_run.profiles) {
        for i in 0..cells {
            worst = worst.max(lo[i] - hi[i]);
        }
    }
    worst.max(0.0)
}

fn sorted_increasing(values: &[Option<f64>]) -> bool {
    // None (infinity) must come last; finite prefix strictly increasing.
    let mut prev: Option<f64> = None;
    let mut seen_none = false;
    for v in values {
        match v {
            Some(x) => {
                if seen_none {
                    return false;
                }
                if let Some(p) = prev {
                    if *x <= p {
                        return false;
                    }
                }
                prev = Some(*x);
            }
            None => seen_none = true,
        }
    }
    true
}

/// Runs the three comparison ladders (truncation level, domain radius, datum
/// cap) and reports the worst pointwise violation of each order relation.
///
/// The datum is supplied as a function of radius so that it can be sampled
/// consistently on every grid; radii in the plan must be integer multiples of
/// the base spacing `r_outer / n_cells` so that cells align across domains.
pub fn ladder_check<F: Fn(f64) -> f64>(
    params: &ModelParams,
    datum_fn: F,
    n_cells: usize,
    schedule: &TimeSchedule,
    plan: &LadderPlan,
) -> Result<MonotonicityReport> {
    params.validate()?;
    schedule.validate()?;
    if plan.k_levels.len() < 2 || plan.r_values.len() < 2 || plan.h_caps.len() < 2 {
        return Err(Error::invalid(
            "each ladder needs at least two rungs to compare",
        ));
    }
    if !sorted_increasing(&plan.k_levels) || !sorted_increasing(&plan.h_caps) {
        return Err(Error::invalid(
            "truncation levels and datum caps must increase strictly (infinite last)",
        ));
    }
    if plan.r_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("domain radii must increase strictly"));
    }

    let base_grid = params.grid(n_cells)?;
    let datum: Vec<f64> = base_grid.centers.iter().map(|&r| datum_fn(r)).collect();

    // Truncation-level ladder on the base grid.
    let mut k_violation = 0.0f64;
    let mut prev: Option<Trajectory> = None;
    for k in &plan.k_levels {
        let run_params = ModelParams {
            k_trunc: *k,
            reaction: true,
            ..params.clone()
        };
        let traj = solve(&run_params, &base_grid, &datum, schedule)?;
        if let Some(lower) = &prev {
            k_violation = k_violation.max(max_excess(lower, &traj, n_cells));
        }
        prev = Some(traj);
    }

    // Domain-radius ladder with aligned cells.
    let dr = params.r_outer / n_cells as f64;
    let mut runs: Vec<(usize, Trajectory)> = Vec::new();
    for &radius in &plan.r_values {
        let cells_f = radius / dr;
        let cells = cells_f.round() as usize;
        if cells < 2 || (cells_f - cells as f64).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "ladder radius {radius} is not an integer multiple of the base spacing {dr}"
            )));
        }
        let run_params = ModelParams {
            r_outer: radius,
            ..params.clone()
        };
        let grid = run_params.grid(cells)?;
        let datum_r: Vec<f64> = grid.centers.iter().map(|&r| datum_fn(r)).collect();
        let traj = solve(&run_params, &grid, &datum_r, schedule)?;
        runs.push((cells, traj));
    }
    let mut r_violation = 0.0f64;
    for pair in runs.windows(2) {
        let (cells_small, small) = &pair[0];
        let (_, large) = &pair[1];
        r_violation = r_violation.max(max_excess(small, large, *cells_small));
    }

    // Datum-cap ladder on the base grid.
    let mut h_violation = 0.0f64;
    let mut prev: Option<Trajectory> = None;
    for cap in &plan.h_caps {
        let capped: Vec<f64> = match cap {
            Some(h) => datum.iter().map(|&v| v.min(*h)).collect(),
            None => datum.clone(),
        };
        let traj = solve(params, &base_grid, &capped, schedule)?;
        if let Some(lower) = &prev {
            h_violation = h_violation.max(max_excess(lower, &traj, n_cells));
        }
        prev = Some(traj);
    }

    Ok(MonotonicityReport {
        k_violation,
        r_violation,
        h_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn euc3(r_outer: f64) -> ModelParams {
        ModelParams {
            m: 2.0,
            p: 1.5,
            k_trunc: None,
            reaction: false,
            geom: RadialGeometry::Euclidean { dim: 3 },
            weight: Weight::Unit,
            r_outer,
        }
    }

    fn hyp3(r_outer: f64) -> ModelParams {
        ModelParams {
            geom: RadialGeometry::Hyperbolic { dim: 3, kappa: 1.0 },
            ..euc3(r_outer)
        }
    }

    fn bump(r: f64, center: f64, width: f64, height: f64) -> f64 {
        let x = (r - center) / width;
        if x.abs() < 1.0 {
            height * (1.0 - 1.0 / (1.0 - x * x)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn truncation_clamps_from_above() {
        assert_eq!(truncate(9.0, 4.0), 4.0);
        assert_eq!(truncate(3.0, 4.0), 3.0);
        assert_eq!(truncate(0.0, 4.0), 0.0);
        assert_eq!(truncate(5.0, f64::INFINITY), 5.0);
    }

    #[test]
    fn laplacian_of_constant_vanishes_in_the_interior() {
        let params = euc3(2.0);
        let grid = params.grid(50).unwrap();
        let v = vec![3.0; 50];
        let lap = discrete_laplacian(&grid, &v);
        for (i, &l) in lap.iter().take(49).enumerate() {
            assert!(
                l.abs() < 1e-12,
                "interior Laplacian of a constant must vanish, got {l} at cell {i}"
            );
        }
        // The last cell sees the Dirichlet ghost and must be strongly negative.
        assert!(lap[49] < -1.0);
    }

    #[test]
    fn laplacian_of_r_squared_is_exactly_two_n() {
        // In ℝ³, Δ(r²) = 6; for quadratics the flux quadrature is exact, so
        // the discrete value matches to round-off on interior cells.
        let params = euc3(2.0);
        let grid = params.grid(64).unwrap();
        let v: Vec<f64> = grid.centers.iter().map(|&r| r * r).collect();
        let lap = discrete_laplacian(&grid, &v);
        for &l in lap.iter().take(63) {
            assert_relative_eq!(l, 6.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn laplacian_of_cosh_on_hyperbolic_space() {
        // On ℍ³ (κ = 1), Δ cosh r = cosh″ + 2 coth(r) sinh r = 3 cosh r.
        let params = hyp3(3.0);
        let check = |n: usize| -> f64 {
            let grid = params.grid(n).unwrap();
            let v: Vec<f64> = grid.centers.iter().map(|&r| r.cosh()).collect();
            let lap = discrete_laplacian(&grid, &v);
            let mut worst = 0.0f64;
            for (&l, &r) in lap.iter().zip(&grid.centers).take(n - 1) {
                let expect = 3.0 * r.cosh();
                worst = worst.max(((l - expect) / expect).abs());
            }
            worst
        };
        let coarse = check(200);
        let fine = check(400);
        assert!(coarse < 1e-3, "relative error {coarse} too large at n=200");
        assert!(
            fine < coarse / 3.0,
            "halving the spacing should shrink the error at second order, got {coarse} -> {fine}"
        );
    }

    #[test]
    fn lq_norm_oracles() {
        // u ≡ 1 on B₁ ⊂ ℝ³: ‖u‖_q = vol(B₁)^{1/q} = (4π/3)^{1/q}.
        let params = euc3(1.0);
        let grid = params.grid(200).unwrap();
        let u = vec![1.0; 200];
        let vol = 4.0 * std::f64::consts::PI / 3.0;
        assert_relative_eq!(lq_norm(&grid, &u, 1.0).unwrap(), vol, max_relative = 1e-9);
        assert_relative_eq!(
            lq_norm(&grid, &u, 2.0).unwrap(),
            vol.sqrt(),
            max_relative = 1e-9
        );
        assert_relative_eq!(lq_norm(&grid, &u, f64::INFINITY).unwrap(), 1.0, max_relative = 1e-15);
        assert!(lq_norm(&grid, &u, 0.5).is_err(), "q < 1 must be rejected");
    }

    #[test]
    fn pure_diffusion_preserves_nonnegativity_and_dissipates_mass() {
        let params = euc3(5.0);
        let grid = params.grid(120).unwrap();
        let datum: Vec<f64> = grid.centers.iter().map(|&r| bump(r, 1.5, 1.0, 2.0)).collect();
        let state = State::initial(&grid, &datum).unwrap();
        let mass0 = geometric_mass(&grid, &state.u);
        let mut s = state;
        for _ in 0..20 {
            s = step(&params, &grid, &s, 0.01).unwrap();
            assert!(s.u.iter().all(|&v| v >= 0.0), "solution must stay nonnegative");
            let mass = geometric_mass(&grid, &s.u);
            assert!(
                mass <= mass0 * (1.0 + 1e-10),
                "diffusion with Dirichlet boundary cannot create mass: {mass} > {mass0}"
            );
        }
        assert_relative_eq!(s.t, 0.2, max_relative = 1e-12);
    }

    #[test]
    fn reaction_grows_supercritical_constant_states() {
        // With reaction on and diffusion inert (constant profile in the deep
        // interior), du/dt ≈ uᵖ, so a constant 1 grows initially.
        let mut params = hyp3(8.0);
        params.reaction = true;
        let grid = params.grid(160).unwrap();
        let datum = vec![1.0; 160];
        let state = State::initial(&grid, &datum).unwrap();
        let s = step(&params, &grid, &state, 0.01).unwrap();
        // Center cell is far from the boundary: growth should be visible.
        assert!(
            s.u[0] > 1.0 + 0.005,
            "reaction should push the center above 1, got {}",
            s.u[0]
        );
    }

    #[test]
    fn truncated_reaction_is_inert_above_the_level() {
        // With k below the reaction magnitude, growth is capped at rate k.
        let mut params = hyp3(8.0);
        params.reaction = true;
        params.k_trunc = Some(0.5);
        let grid = params.grid(80).unwrap();
        let datum = vec![4.0; 80];
        let state = State::initial(&grid, &datum).unwrap();
        let dt = 0.01;
        let s = step(&params, &grid, &state, dt).unwrap();
        // Reaction adds at most dt·k everywhere.
        for (after, before) in s.u.iter().zip(&datum) {
            assert!(after - before <= dt * 0.5 + 1e-9);
        }
    }

    #[test]
    fn truncation_above_solution_range_changes_nothing() {
        let mut params = euc3(4.0);
        params.reaction = true;
        let grid = params.grid(100).unwrap();
        let datum: Vec<f64> = grid.centers.iter().map(|&r| bump(r, 1.0, 0.8, 1.0)).collect();
        let schedule = TimeSchedule {
            checkpoints: vec![0.05, 0.1],
            dt_init: 1e-4,
            dt_max: 5e-3,
            dt_min: 1e-12,
            growth: 1.3,
            q_record: None,
        };
        let untruncated = solve(&params, &grid, &datum, &schedule).unwrap();
        params.k_trunc = Some(1e6); // far above max uᵖ along the run
        let truncated = solve(&params, &grid, &datum, &schedule).unwrap();
        for (a, b) in untruncated.profiles.iter().zip(&truncated.profiles) {
            for (x, y) in a.1.iter().zip(&b.1) {
                assert!(
                    (x - y).abs() <= 1e-12,
                    "inactive truncation must reproduce the untruncated run"
                );
            }
        }
    }

    #[test]
    fn comparison_principle_for_ordered_data() {
        let mut params = hyp3(6.0);
        params.reaction = true;
        params.k_trunc = Some(3.0);
        let grid = params.grid(90).unwrap();
        let lo: Vec<f64> = grid.centers.iter().map(|&r| bump(r, 1.2, 1.0, 0.8)).collect();
        let hi: Vec<f64> = grid.centers.iter().map(|&r| bump(r, 1.2, 1.0, 0.8) + 0.2).collect();
        let schedule = TimeSchedule {
            checkpoints: vec![0.1, 0.3],
            dt_init: 1e-4,
            dt_max: 1e-2,
            dt_min: 1e-12,
            growth: 1.3,
            q_record: None,
        };
        let run_lo = solve(&params, &grid, &lo, &schedule).unwrap();
        let run_hi = solve(&params, &grid, &hi, &schedule).unwrap();
        for (a, b) in run_lo.profiles.iter().zip(&run_hi.profiles) {
            for (x, y) in a.1.iter().zip(&b.1) {
                assert!(
                    *x <= *y + 1e-8,
                    "ordered data must stay ordered: {x} > {y}"
                );
            }
        }
    }

    #[test]
    fn two_half_steps_reproduce_one_step_at_first_order() {
        // Implicit Euler is first order: the defect of one dt-step against two
        // (dt/2)-steps shrinks like dt² as dt is refined. Measured on a
        // strictly positive, pre-evolved state so the problem is uniformly
        // parabolic — at the degenerate free boundary the pointwise defect is
        // dominated by single-cell activation flicker and does not show the
        // clean Richardson order.
        let params = euc3(4.0);
        let grid = params.grid(80).unwrap();
        let datum: Vec<f64> = grid
            .centers
            .iter()
            .map(|&r| 0.3 + bump(r, 1.0, 0.9, 1.5))
            .collect();
        let mut state = State::initial(&grid, &datum).unwrap();
        for _ in 0..10 {
            state = step(&params, &grid, &state, 0.01).unwrap();
        }
        let defect = |dt: f64| -> f64 {
            let one = step(&params, &grid, &state, dt).unwrap();
            let half = step(&params, &grid, &state, dt / 2.0).unwrap();
            let two = step(&params, &grid, &half, dt / 2.0).unwrap();
            one.u
                .iter()
                .zip(&two.u)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
        };
        let d1 = defect(0.02);
        let d2 = defect(0.01);
        assert!(d1 > 1e-12, "defect should be measurable, got {d1}");
        assert!(
            d2 < d1 / 3.0,
            "halving dt should shrink the Richardson defect ~4x, got {d1} -> {d2}"
        );
    }

    #[test]
    fn solve_hits_checkpoints_exactly_and_records_norms() {
        let params = euc3(3.0);
        let grid = params.grid(60).unwrap();
        let datum: Vec<f64> = grid.centers.iter().map(|&r| bump(r, 1.0, 0.8, 1.0)).collect();
        let schedule = TimeSchedule {
            checkpoints: vec![0.0, 0.05, 0.125, 0.2],
            dt_init: 1e-4,
            dt_max: 7e-3,
            dt_min: 1e-12,
            growth: 1.4,
            q_record: Some(3.0),
        };
        let traj = solve(&params, &grid, &datum, &schedule).unwrap();
        assert_eq!(traj.checkpoints.len(), 4);
        assert_eq!(traj.q_recorded, 3.0);
        for (c, &t_expect) in traj.checkpoints.iter().zip(&schedule.checkpoints) {
            assert_eq!(c.t, t_expect, "checkpoints must be hit exactly");
            assert!(c.l1 >= 0.0 && c.lq >= 0.0 && c.lm >= 0.0 && c.linf >= 0.0);
        }
        // Pure diffusion: all norms nonincreasing.
        for w in traj.checkpoints.windows(2) {
            assert!(w[1].l1 <= w[0].l1 * (1.0 + 1e-10));
            assert!(w[1].linf <= w[0].linf * (1.0 + 1e-10));
        }
        // The datum checkpoint stores the datum itself.
        assert_eq!(traj.profiles[0].1, datum);
    }

    #[test]
    fn underflow_of_the_step_floor_is_a_hard_error() {
        // An amplitude whose m-th power overflows makes the Newton residual
        // non-finite, so the first attempt fails; with the floor equal to the
        // step, the very first halving dips below it and must surface as the
        // dedicated underflow error.
        let mut params = euc3(2.0);
        params.m = 9.0;
        let grid = params.grid(30).unwrap();
        let mut datum = vec![1.0; 30];
        datum[0] = 1e40; // (1e40)⁹ overflows f64
        let state = State::initial(&grid, &datum).unwrap();
        match step_with_floor(&params, &grid, &state, 1e-3, 1e-3) {
            Err(Error::TimeStepUnderflow { dt_min, dt, .. }) => {
                assert_eq!(dt_min, 1e-3);
                assert_eq!(dt, 1e-3, "the failing attempt was the full step");
            }
            Err(other) => panic!("expected TimeStepUnderflow, got {other}"),
            Ok(_) => panic!("an overflowing residual cannot converge"),
        }
    }

    #[test]
    fn csv_output_is_deterministic_and_schema_stable() {
        let params = euc3(2.0);
        let grid = params.grid(40).unwrap();
        let datum: Vec<f64> = grid.centers.iter().map(|&r| bump(r, 0.7, 0.5, 1.0)).collect();
        let schedule = TimeSchedule {
            checkpoints: vec![0.0, 0.02],
            dt_init: 1e-4,
            dt_max: 2e-3,
            dt_min: 1e-12,
            growth: 1.3,
            q_record: None,
        };
        let traj = solve(&params, &grid, &datum, &schedule).unwrap();
        let mut buf1 = Vec::new();
        traj.write_csv(&mut buf1).unwrap();
        let text = String::from_utf8(buf1.clone()).unwrap();
        assert!(text.starts_with("t,l1,lq,lm,linf\n"));
        let rerun = solve(&params, &grid, &datum, &schedule).unwrap();
        let mut buf2 = Vec::new();
        rerun.write_csv(&mut buf2).unwrap();
        assert_eq!(buf1, buf2, "identical runs must serialize byte-identically");
        let mut prof = Vec::new();
        traj.write_profile_csv(&mut prof, &grid, 0).unwrap();
        assert!(String::from_utf8(prof).unwrap().starts_with("r,u\n"));
    }

    #[test]
    fn ladder_rejects_malformed_plans() {
        let params = euc3(5.0);
        let schedule = TimeSchedule {
            checkpoints: vec![0.05],
            dt_init: 1e-3,
            dt_max: 1e-2,
            dt_min: 1e-12,
            growth: 1.5,
            q_record: None,
        };
        let bad_k = LadderPlan {
            k_levels: vec![Some(2.0), Some(1.0)],
            r_values: vec![2.5, 5.0],
            h_caps: vec![Some(1.0), None],
        };
        assert!(ladder_check(&params, |_| 1.0, 50, &schedule, &bad_k).is_err());
        let bad_r = LadderPlan {
            k_levels: vec![Some(1.0), None],
            r_values: vec![2.35, 5.0], // 2.35 is no multiple of the 0.1 spacing
            h_caps: vec![Some(1.0), None],
        };
        assert!(ladder_check(&params, |_| 1.0, 50, &schedule, &bad_r).is_err());
    }
}
