//! Finite-difference time-domain oracle for the half-plane problem.
//!
//! This solver shares no machinery with the spectral route: a collocated
//! displacement leapfrog on a truncated rectangle, with the surface stress
//! condition imposed exactly (to rounding) through ghost rows, quadratic
//! sponge layers on the three artificial edges, and pinned outer walls.
//! Agreement between the two routes therefore validates the contour
//! representation against nothing but the differential equations.
//!
//! The equations of motion (unit density) are
//! `u_tt = cp² u_xx + cs² u_yy + (λ+μ) v_xy` and
//! `v_tt = cs² v_xx + cp² v_yy + (λ+μ) u_xy`,
//! and the surface rows enforce `u_y + v_x = g1` and `v_y + γ u_x = g2`
//! with `γ = λ/(λ+2μ)` (so `σ_xy = μ g1`, `σ_yy = (λ+2μ) g2`).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::material::Material;
use crate::solver::{
    data_extent, forcing_physical, initial_physical, FieldGrid, GridMeta, Normalization,
    ProblemSpec,
};
use crate::transforms::{BoundaryForcing, InitialData, TimeProfile};

/// Grid and truncation parameters for one simulation.
///
/// The physical domain is `[−x_half_width, x_half_width] × [0, y_depth]`
/// (half widths are rounded to whole numbers of cells). Mollification
/// parameters live on the forcing itself; [`run`] checks them against the
/// resolution (`mollify_eps ≥ 4h`, rise time `≥ 4Δt`) so the discrete load
/// is smooth on the grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdtdConfig {
    pub x_half_width: f64,
    pub y_depth: f64,
    /// Node spacing (same in x and y).
    pub h: f64,
    /// Time step; `None` picks the default `0.5·h/cp`. Values above that
    /// bound are rejected ([`Error::CflViolation`]).
    pub dt: Option<f64>,
    /// Width of the absorbing layers inside the three artificial edges.
    pub sponge_width: f64,
    /// Re-run at `h/2` and record the solution difference in the metadata.
    pub convergence_pair: bool,
}

impl Default for FdtdConfig {
    fn default() -> Self {
        FdtdConfig {
            x_half_width: 3.0,
            y_depth: 3.0,
            h: 1.0 / 64.0,
            dt: None,
            sponge_width: 1.0,
            convergence_pair: false,
        }
    }
}

impl FdtdConfig {
    /// The time step actually used.
    pub fn time_step(&self, mat: &Material) -> f64 {
        self.dt.unwrap_or(0.5 * self.h / mat.cp())
    }

    fn validate(&self, mat: &Material) -> Result<()> {
        Material::new(mat.lambda, mat.mu)?;
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidParameter("spacing h must be positive".into()));
        }
        if self.x_half_width < 2.0 * self.h || self.y_depth < 2.0 * self.h {
            return Err(Error::InvalidParameter(
                "domain must span at least two cells each way".into(),
            ));
        }
        if self.sponge_width < 0.0 {
            return Err(Error::InvalidParameter("sponge width must be >= 0".into()));
        }
        let dt = self.time_step(mat);
        let limit = 0.5 * self.h / mat.cp();
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
        Ok(())
    }
}

/// How the rectangle edges close the stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edges {
    /// Production: free surface at y = 0 (ghost row), pinned + sponged
    /// x-walls and bottom.
    HalfPlane,
    /// Test harness: periodic in x, free surface at y = 0, pinned bottom,
    /// no sponge. Keeps the operator self-adjoint for reciprocity checks.
    PeriodicX,
    /// Test harness: periodic in both directions (no boundaries at all).
    PeriodicBox,
}

/// A configured simulation: geometry, material constants and the sponge
/// profile. States are produced by [`Fdtd::init`] and advanced by
/// [`Fdtd::step`].
#[derive(Debug, Clone)]
pub struct Fdtd {
    mat: Material,
    h: f64,
    dt: f64,
    nx: usize,
    ny: usize,
    x0: f64,
    edges: Edges,
    /// Per-node damping factor, or `None` when no sponge is active.
    damp: Option<Vec<f64>>,
}

/// Displacement arrays at the two time levels the leapfrog carries, stored
/// row-major `[iy·nx + ix]` with `iy = 0` at the surface.
#[derive(Debug, Clone)]
pub struct FdtdState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub u_prev: Vec<f64>,
    pub v_prev: Vec<f64>,
    /// `u` holds time `step_index · dt`, `u_prev` one step earlier.
    pub step_index: usize,
}

impl FdtdState {
    /// Time of the newest level.
    pub fn time(&self, dt: f64) -> f64 {
        self.step_index as f64 * dt
    }
}

impl Fdtd {
    /// Production half-plane simulation.
    pub fn new(cfg: &FdtdConfig, mat: &Material) -> Result<Self> {
        Self::with_edges(cfg, mat, Edges::HalfPlane)
    }

    /// Periodic-in-x harness with a free surface: used for reciprocity
    /// checks, where the sponge would break self-adjointness.
    pub fn new_periodic_x(cfg: &FdtdConfig, mat: &Material) -> Result<Self> {
        Self::with_edges(cfg, mat, Edges::PeriodicX)
    }

    /// Fully periodic harness: used for phase-speed and energy-conservation
    /// checks against the free-space operator.
    pub fn new_periodic_box(cfg: &FdtdConfig, mat: &Material) -> Result<Self> {
        Self::with_edges(cfg, mat, Edges::PeriodicBox)
    }

    fn with_edges(cfg: &FdtdConfig, mat: &Material, edges: Edges) -> Result<Self> {
        cfg.validate(mat)?;
        let h = cfg.h;
        // periodic directions drop the duplicate end node
        let nx = match edges {
            Edges::HalfPlane => (2.0 * cfg.x_half_width / h).round() as usize + 1,
            Edges::PeriodicX | Edges::PeriodicBox => (2.0 * cfg.x_half_width / h).round() as usize,
        };
        let ny = match edges {
            Edges::PeriodicBox => (cfg.y_depth / h).round() as usize,
            _ => (cfg.y_depth / h).round() as usize + 1,
        };
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidParameter("grid needs at least 4 nodes each way".into()));
        }
        let x0 = -cfg.x_half_width;
        let damp = match edges {
            Edges::HalfPlane if cfg.sponge_width > 0.0 => {
                let w = cfg.sponge_width;
                let x_edge = cfg.x_half_width - w;
                let y_edge = cfg.y_depth - w;
                let mut d = vec![1.0; nx * ny];
                for iy in 0..ny {
                    let y = iy as f64 * h;
                    let sy = ((y - y_edge) / w).clamp(0.0, 1.0);
                    for ix in 0..nx {
                        let x = x0 + ix as f64 * h;
                        let sx = ((x.abs() - x_edge) / w).clamp(0.0, 1.0);
                        d[iy * nx + ix] = 1.0 - 0.06 * (sx * sx + sy * sy);
                    }
                }
                Some(d)
            }
            _ => None,
        };
        Ok(Fdtd { mat: mat.clone(), h, dt: cfg.time_step(mat), nx, ny, x0, edges, damp })
    }

    /// Node coordinate.
    pub fn node(&self, ix: usize, iy: usize) -> (f64, f64) {
        (self.x0 + ix as f64 * self.h, iy as f64 * self.h)
    }

    /// Grid shape `(nx, ny)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Time step in use.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn has_surface(&self) -> bool {
        self.edges != Edges::PeriodicBox
    }

    /// Ghost rows at y = −h realizing the surface stress condition with
    /// centered differences: `(U₁ − U_g)/2h + ∂x v₀ = g1` and
    /// `(V₁ − V_g)/2h + γ ∂x u₀ = g2`.
    fn ghost_rows(
        &self,
        u: &[f64],
        v: &[f64],
        forcing: &BoundaryForcing,
        t: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let (nx, h) = (self.nx, self.h);
        let gamma = self.mat.lambda / self.mat.pmod();
        let mut gu = vec![0.0; nx];
        let mut gv = vec![0.0; nx];
        for ix in 0..nx {
            let x = self.x0 + ix as f64 * h;
            // surface-row tangential derivatives (wrapped, centered, or
            // one-sided at pinned corners)
            let (ux0, vx0) = match self.edges {
                Edges::PeriodicX | Edges::PeriodicBox => {
                    let ixm = (ix + nx - 1) % nx;
                    let ixp = (ix + 1) % nx;
                    ((u[ixp] - u[ixm]) / (2.0 * h), (v[ixp] - v[ixm]) / (2.0 * h))
                }
                Edges::HalfPlane if ix == 0 => {
                    ((u[1] - u[0]) / h, (v[1] - v[0]) / h)
                }
                Edges::HalfPlane if ix == nx - 1 => {
                    ((u[ix] - u[ix - 1]) / h, (v[ix] - v[ix - 1]) / h)
                }
                Edges::HalfPlane => {
                    ((u[ix + 1] - u[ix - 1]) / (2.0 * h), (v[ix + 1] - v[ix - 1]) / (2.0 * h))
                }
            };
            let g1 = forcing_physical(forcing, &self.mat, 1, x, t)?;
            let g2 = forcing_physical(forcing, &self.mat, 2, x, t)?;
            gu[ix] = u[nx + ix] - 2.0 * h * (g1 - vx0);
            gv[ix] = v[nx + ix] - 2.0 * h * (g2 - gamma * ux0);
        }
        Ok((gu, gv))
    }

    /// Acceleration field `(ü, v̈)` of the current displacement levels.
    fn rhs(
        &self,
        u: &[f64],
        v: &[f64],
        ghost: Option<&(Vec<f64>, Vec<f64>)>,
    ) -> (Vec<f64>, Vec<f64>) {
        let (nx, ny) = (self.nx, self.ny);
        let inv_h2 = 1.0 / (self.h * self.h);
        let cp2 = self.mat.pmod();
        let cs2 = self.mat.mu;
        let lm = self.mat.lambda + self.mat.mu;
        let mut ru = vec![0.0; nx * ny];
        let mut rv = vec![0.0; nx * ny];
        let periodic_x = matches!(self.edges, Edges::PeriodicX | Edges::PeriodicBox);
        let periodic_y = self.edges == Edges::PeriodicBox;

        ru.par_chunks_mut(nx)
            .zip(rv.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(iy, (ru_row, rv_row))| {
                // rows whose stencil would leave the grid are pinned at zero
                if !periodic_y && iy == ny - 1 {
                    return;
                }
                if iy == 0 && !periodic_y && ghost.is_none() {
                    return;
                }
                let row = iy * nx;
                let up = if iy == 0 {
                    if periodic_y {
                        (ny - 1) * nx
                    } else {
                        usize::MAX // ghost
                    }
                } else {
                    (iy - 1) * nx
                };
                let dn = if iy == ny - 1 { 0 } else { (iy + 1) * nx };
                let (gu, gv) = match ghost {
                    Some((gu, gv)) => (gu.as_slice(), gv.as_slice()),
                    None => (&[][..], &[][..]),
                };
                let u_up = |ix: usize| if up == usize::MAX { gu[ix] } else { u[up + ix] };
                let v_up = |ix: usize| if up == usize::MAX { gv[ix] } else { v[up + ix] };
                let mut stencil = |ix: usize, ixm: usize, ixp: usize| {
                    let c = row + ix;
                    let uxx = u[row + ixp] - 2.0 * u[c] + u[row + ixm];
                    let vxx = v[row + ixp] - 2.0 * v[c] + v[row + ixm];
                    let uyy = u[dn + ix] - 2.0 * u[c] + u_up(ix);
                    let vyy = v[dn + ix] - 2.0 * v[c] + v_up(ix);
                    let uxy = 0.25 * (u[dn + ixp] - u[dn + ixm] - u_up(ixp) + u_up(ixm));
                    let vxy = 0.25 * (v[dn + ixp] - v[dn + ixm] - v_up(ixp) + v_up(ixm));
                    ru_row[ix] = inv_h2 * (cp2 * uxx + cs2 * uyy + lm * vxy);
                    rv_row[ix] = inv_h2 * (cs2 * vxx + cp2 * vyy + lm * uxy);
                };
                for ix in 1..nx - 1 {
                    stencil(ix, ix - 1, ix + 1);
                }
                if periodic_x {
                    stencil(0, nx - 1, 1);
                    stencil(nx - 1, nx - 2, 0);
                }
            });
        (ru, rv)
    }

    /// Initial state: level 0 is the initial displacement, level 1 the
    /// second-order Taylor start `u⁰ + Δt·u̇⁰ + (Δt²/2)·ü⁰`.
    pub fn init(&self, initial: &InitialData, forcing: &BoundaryForcing) -> Result<FdtdState> {
        let (nx, ny) = (self.nx, self.ny);
        let mut u0 = vec![0.0; nx * ny];
        let mut v0 = vec![0.0; nx * ny];
        let mut ut = vec![0.0; nx * ny];
        let mut vt = vec![0.0; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let (x, y) = self.node(ix, iy);
                let (a, b, c, d) = initial_physical(initial, x, y);
                let i = iy * nx + ix;
                u0[i] = a;
                ut[i] = b;
                v0[i] = c;
                vt[i] = d;
            }
        }
        self.pin_walls(&mut u0);
        self.pin_walls(&mut v0);
        let ghost = if self.has_surface() {
            Some(self.ghost_rows(&u0, &v0, forcing, 0.0)?)
        } else {
            None
        };
        let (ru, rv) = self.rhs(&u0, &v0, ghost.as_ref());
        let dt = self.dt;
        let mut u1 = vec![0.0; nx * ny];
        let mut v1 = vec![0.0; nx * ny];
        for i in 0..nx * ny {
            u1[i] = u0[i] + dt * ut[i] + 0.5 * dt * dt * ru[i];
            v1[i] = v0[i] + dt * vt[i] + 0.5 * dt * dt * rv[i];
        }
        self.pin_walls(&mut u1);
        self.pin_walls(&mut v1);
        Ok(FdtdState { u: u1, v: v1, u_prev: u0, v_prev: v0, step_index: 1 })
    }

    fn pin_walls(&self, a: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        if self.edges == Edges::PeriodicBox {
            return;
        }
        for ix in 0..nx {
            a[(ny - 1) * nx + ix] = 0.0;
        }
        if self.edges == Edges::HalfPlane {
            for iy in 0..ny {
                a[iy * nx] = 0.0;
                a[iy * nx + nx - 1] = 0.0;
            }
        }
    }

    /// One leapfrog step `uⁿ⁺¹ = 2uⁿ − uⁿ⁻¹ + Δt²·ü(uⁿ)`, with the forcing
    /// evaluated at the current level's time and the sponge applied to both
    /// retained levels.
    pub fn step(&self, st: &mut FdtdState, forcing: &BoundaryForcing) -> Result<()> {
        let t = st.time(self.dt);
        let ghost = if self.has_surface() {
            Some(self.ghost_rows(&st.u, &st.v, forcing, t)?)
        } else {
            None
        };
        let (ru, rv) = self.rhs(&st.u, &st.v, ghost.as_ref());
        let dt2 = self.dt * self.dt;
        let n = self.nx * self.ny;
        match &self.damp {
            Some(d) => {
                for i in 0..n {
                    st.u_prev[i] = d[i] * (2.0 * st.u[i] - st.u_prev[i] + dt2 * ru[i]);
                    st.v_prev[i] = d[i] * (2.0 * st.v[i] - st.v_prev[i] + dt2 * rv[i]);
                    st.u[i] *= d[i];
                    st.v[i] *= d[i];
                }
            }
            None => {
                for i in 0..n {
                    st.u_prev[i] = 2.0 * st.u[i] - st.u_prev[i] + dt2 * ru[i];
                    st.v_prev[i] = 2.0 * st.v[i] - st.v_prev[i] + dt2 * rv[i];
                }
            }
        }
        std::mem::swap(&mut st.u, &mut st.u_prev);
        std::mem::swap(&mut st.v, &mut st.v_prev);
        st.step_index += 1;
        Ok(())
    }

    /// Discrete energy audit: kinetic part from the level difference, strain
    /// part `½λ(∇·u)² + μ(u_x² + v_y²) + ½μ(u_y + v_x)²` at the midpoint of
    /// the two levels, summed over interior nodes. Second-order accurate;
    /// not an exactly conserved discrete invariant, so conservation checks
    /// allow O(Δt²) slack.
    pub fn energy(&self, st: &FdtdState) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let (la, mu) = (self.mat.lambda, self.mat.mu);
        let inv_dt = 1.0 / self.dt;
        let inv_2h = 1.0 / (2.0 * self.h);
        let periodic_x = matches!(self.edges, Edges::PeriodicX | Edges::PeriodicBox);
        let periodic_y = self.edges == Edges::PeriodicBox;
        let um: Vec<f64> =
            st.u.iter().zip(&st.u_prev).map(|(a, b)| 0.5 * (a + b)).collect();
        let vm: Vec<f64> =
            st.v.iter().zip(&st.v_prev).map(|(a, b)| 0.5 * (a + b)).collect();
        let mut e = 0.0;
        for iy in 0..ny {
            if !periodic_y && (iy == 0 || iy == ny - 1) {
                continue;
            }
            let up = (if iy == 0 { ny - 1 } else { iy - 1 }) * nx;
            let dn = (if iy == ny - 1 { 0 } else { iy + 1 }) * nx;
            let row = iy * nx;
            for ix in 0..nx {
                if !periodic_x && (ix == 0 || ix == nx - 1) {
                    continue;
                }
                let ixm = if ix == 0 { nx - 1 } else { ix - 1 };
                let ixp = if ix == nx - 1 { 0 } else { ix + 1 };
                let i = row + ix;
                let kin = ((st.u[i] - st.u_prev[i]) * inv_dt).powi(2)
                    + ((st.v[i] - st.v_prev[i]) * inv_dt).powi(2);
                let ux = (um[row + ixp] - um[row + ixm]) * inv_2h;
                let vx = (vm[row + ixp] - vm[row + ixm]) * inv_2h;
                let uy = (um[dn + ix] - um[up + ix]) * inv_2h;
                let vy = (vm[dn + ix] - vm[up + ix]) * inv_2h;
                let strain = 0.5 * la * (ux + vy).powi(2)
                    + mu * (ux * ux + vy * vy)
                    + 0.5 * mu * (uy + vx).powi(2);
                e += 0.5 * kin + strain;
            }
        }
        e * self.h * self.h
    }

    /// Recompute the discrete surface stress condition from the state and
    /// return its worst residual (max over surface nodes of both equations).
    /// The ghost update imposes the condition exactly, so this is a rounding
    /// check, not an accuracy measure.
    pub fn surface_bc_residual(
        &self,
        st: &FdtdState,
        forcing: &BoundaryForcing,
    ) -> Result<f64> {
        if !self.has_surface() {
            return Err(Error::InvalidParameter("harness has no free surface".into()));
        }
        let t = st.time(self.dt);
        let (gu, gv) = self.ghost_rows(&st.u, &st.v, forcing, t)?;
        let (nx, h) = (self.nx, self.h);
        let gamma = self.mat.lambda / self.mat.pmod();
        let mut worst = 0.0f64;
        for ix in 1..nx - 1 {
            let x = self.x0 + ix as f64 * h;
            let uy = (st.u[nx + ix] - gu[ix]) / (2.0 * h);
            let vy = (st.v[nx + ix] - gv[ix]) / (2.0 * h);
            let ux = (st.u[ix + 1] - st.u[ix - 1]) / (2.0 * h);
            let vx = (st.v[ix + 1] - st.v[ix - 1]) / (2.0 * h);
            let g1 = forcing_physical(forcing, &self.mat, 1, x, t)?;
            let g2 = forcing_physical(forcing, &self.mat, 2, x, t)?;
            worst = worst.max((uy + vx - g1).abs()).max((vy + gamma * ux - g2).abs());
        }
        Ok(worst)
    }

    /// Bilinear sample of one array at a physical point.
    fn sample(&self, a: &[f64], x: f64, y: f64) -> f64 {
        let fx = ((x - self.x0) / self.h).clamp(0.0, (self.nx - 1) as f64);
        let fy = (y / self.h).clamp(0.0, (self.ny - 1) as f64);
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let (wx, wy) = (fx - ix as f64, fy - iy as f64);
        let g = |i: usize, j: usize| a[j * self.nx + i];
        g(ix, iy) * (1.0 - wx) * (1.0 - wy)
            + g(ix + 1, iy) * wx * (1.0 - wy)
            + g(ix, iy + 1) * (1.0 - wx) * wy
            + g(ix + 1, iy + 1) * wx * wy
    }
}

/// Check the forcing is resolvable on the grid: Gaussian mollifier at least
/// 4 cells wide, time profile rising over at least 4 steps.
fn check_mollification(forcing: &BoundaryForcing, h: f64, dt: f64) -> Result<()> {
    let eps_ok = |eps: f64| -> Result<()> {
        if eps < 4.0 * h {
            return Err(Error::InvalidParameter(format!(
                "mollify_eps = {eps} must be at least 4h = {}",
                4.0 * h
            )));
        }
        Ok(())
    };
    let profile_ok = |p: &TimeProfile| -> Result<()> {
        match p {
            TimeProfile::Heaviside => Err(Error::InvalidParameter(
                "time-stepped runs need a smoothed profile (rise >= 4 dt)".into(),
            )),
            TimeProfile::SmoothedHeaviside { tau } if *tau < 4.0 * dt => {
                Err(Error::InvalidParameter(format!(
                    "rise time tau = {tau} must be at least 4 dt = {}",
                    4.0 * dt
                )))
            }
            _ => Ok(()),
        }
    };
    match forcing {
        BoundaryForcing::None | BoundaryForcing::Sampled(_) => Ok(()),
        BoundaryForcing::TangentialLineLoad { sigma0, profile, mollify_eps }
        | BoundaryForcing::NormalLineLoad { sigma0, profile, mollify_eps } => {
            if *sigma0 == 0.0 {
                return Ok(());
            }
            eps_ok(*mollify_eps)?;
            profile_ok(profile)
        }
        BoundaryForcing::MovingNormalLoad { sigma0, mollify_eps, .. } => {
            if *sigma0 == 0.0 {
                return Ok(());
            }
            eps_ok(*mollify_eps)
        }
    }
}

/// Run a full simulation and sample `(u, v)` on the requested output grid.
///
/// Guards: mollification invariants (above); the data's wavefront
/// `extent + cp·t_max` and every sample point must stay inside the sponge-free
/// core, else [`Error::DomainTooSmall`]. With `convergence_pair` set, the run
/// repeats at `h/2` and the relative difference lands in the metadata notes.
pub fn run(
    cfg: &FdtdConfig,
    mat: &Material,
    forcing: &BoundaryForcing,
    initial: &InitialData,
    xs: &[f64],
    ys: &[f64],
    ts: &[f64],
) -> Result<FieldGrid> {
    cfg.validate(mat)?;
    let dt = cfg.time_step(mat);
    check_mollification(forcing, cfg.h, dt)?;
    if ts.is_empty() || ts[0] < 0.0 {
        return Err(Error::InvalidParameter("output times must start at t >= 0".into()));
    }
    let t_max = *ts.last().unwrap();
    let problem = ProblemSpec {
        material: mat.clone(),
        initial: initial.clone(),
        forcing: forcing.clone(),
        normalization: Normalization::FourierConsistent,
    };
    let (x_ext, y_ext) = data_extent(&problem, t_max);
    let usable_x = cfg.x_half_width - cfg.sponge_width;
    let usable_y = cfg.y_depth - cfg.sponge_width;
    let reach = mat.cp() * t_max;
    let r_max = (x_ext + reach).max(y_ext + reach);
    if x_ext + reach > usable_x || y_ext + reach > usable_y {
        return Err(Error::DomainTooSmall { r_max, usable: usable_x.min(usable_y) });
    }
    for &x in xs {
        if x.abs() > usable_x {
            return Err(Error::DomainTooSmall { r_max: x.abs(), usable: usable_x });
        }
    }
    for &y in ys {
        if y > usable_y {
            return Err(Error::DomainTooSmall { r_max: y, usable: usable_y });
        }
    }

    let sim = Fdtd::new(cfg, mat)?;
    let mut st = sim.init(initial, forcing)?;
    let (n_x, n_y, n_t) = (xs.len(), ys.len(), ts.len());
    let mut u_out = vec![0.0; n_x * n_y * n_t];
    let mut v_out = vec![0.0; n_x * n_y * n_t];
    let mut next = 0usize;
    loop {
        let t_curr = st.time(dt);
        while next < n_t && ts[next] <= t_curr + 1e-12 {
            let w = ((ts[next] - (t_curr - dt)) / dt).clamp(0.0, 1.0);
            for (iy, &y) in ys.iter().enumerate() {
                for (ix, &x) in xs.iter().enumerate() {
                    let up = sim.sample(&st.u_prev, x, y);
                    let uc = sim.sample(&st.u, x, y);
                    let vp = sim.sample(&st.v_prev, x, y);
                    let vc = sim.sample(&st.v, x, y);
                    let i = (next * n_y + iy) * n_x + ix;
                    u_out[i] = up + w * (uc - up);
                    v_out[i] = vp + w * (vc - vp);
                }
            }
            next += 1;
        }
        if next >= n_t {
            break;
        }
        sim.step(&mut st, forcing)?;
    }

    let field_scale = u_out
        .iter()
        .chain(&v_out)
        .fold(0.0f64, |m, &z| m.max(z.abs()));
    let mut notes = vec![
        format!(
            "fdtd: collocated leapfrog, h = {}, dt = {dt}, domain [{}, {}] x [0, {}], sponge {}",
            cfg.h, -cfg.x_half_width, cfg.x_half_width, cfg.y_depth, cfg.sponge_width
        ),
        "surface condition imposed through ghost rows; outer walls pinned".into(),
    ];
    if cfg.convergence_pair {
        let fine = FdtdConfig { h: 0.5 * cfg.h, convergence_pair: false, dt: None, ..cfg.clone() };
        let fg = run(&fine, mat, forcing, initial, xs, ys, ts)?;
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for (a, b) in u_out.iter().zip(&fg.u).chain(v_out.iter().zip(&fg.v)) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        let rel = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
        notes.push(format!("convergence pair: rel L2 difference h vs h/2 = {rel:.3e}"));
    }
    FieldGrid::new(
        xs.to_vec(),
        ys.to_vec(),
        ts.to_vec(),
        u_out,
        v_out,
        GridMeta {
            imag_residual: 0.0,
            field_scale,
            normalization: Normalization::FourierConsistent,
            k_max: 0.0,
            l_max: 0.0,
            s_step: dt,
            trace_source: "fdtd".into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            notes,
        },
    )
}
