//! Assembly and evaluation of the half-plane displacement representation.
//!
//! Each displacement component is a pair of double integrals: a contour
//! integral over the deformed path γ_k in the spectral l-plane carrying the
//! eliminated boundary unknowns, plus a real-axis integral of parity
//! combinations of the data functions `N_P`, `N_Q`. This module owns the
//! elimination algebra ([`eliminate_unknowns`]), the two evaluation routes —
//! direct contour quadrature per point ([`SolverSession::evaluate_uv`]) and
//! a trace-based tensor route for grids ([`SolverSession::evaluate_grid`]) —
//! and the diagnostic suite: PDE/BC/IC residuals and the global-relation
//! check.

mod gamma_route;
mod trace_route;

pub use gamma_route::{axis_integrand, evaluate_prop2, gamma_integrand, n_values};
pub use trace_route::{SurfaceField, TraceSource};

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplace::BoundaryTrace;
use crate::material::Material;
use crate::quad::{filon_moments, gauss_legendre};
use crate::spectral::{coeffs, delta, delta_zeros, omega, ZeroSet};
use crate::transforms::{n_pq, BoundaryForcing, InitialData};

/// Prefactor convention for the double-integral representation.
///
/// `FourierConsistent` carries the `1/(4π²)` of the two inverse Fourier
/// transforms; it is the default, and the residual suite pins it (the bare
/// convention misses the governing equations by a factor of ~39.5).
/// `RawDoubleIntegral` evaluates the double integrals with no prefactor,
/// for side-by-side comparison with formulations stated that way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    FourierConsistent,
    RawDoubleIntegral,
}

impl Normalization {
    /// The constant multiplying both double integrals.
    pub fn prefactor(self) -> f64 {
        match self {
            Normalization::FourierConsistent => 1.0 / (4.0 * PI * PI),
            Normalization::RawDoubleIntegral => 1.0,
        }
    }
}

/// A complete problem statement: material, initial data, surface forcing,
/// and the prefactor convention.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub material: Material,
    pub initial: InitialData,
    pub forcing: BoundaryForcing,
    #[serde(default)]
    pub normalization: Normalization,
}

impl ProblemSpec {
    /// Validate the component pieces (material admissibility; sampled-data
    /// array shapes).
    pub fn validate(&self) -> Result<()> {
        Material::new(self.material.lambda, self.material.mu)?;
        if let InitialData::Sampled(s) = &self.initial {
            let n = s.nx * s.ny;
            if s.u0.len() != n || s.u1.len() != n || s.v0.len() != n || s.v1.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "sampled initial data length mismatch: grid {} x {}",
                    s.nx, s.ny
                )));
            }
        }
        if let BoundaryForcing::Sampled(s) = &self.forcing {
            let n = s.nx * s.nt;
            if s.g1.len() != n || s.g2.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "sampled boundary data length mismatch: grid {} x {}",
                    s.nx, s.nt
                )));
            }
        }
        Ok(())
    }
}

/// Tunable truncations and quadrature densities for both evaluation routes.
///
/// The `gamma_*` values drive the per-point contour route; the `grid_*`
/// values drive the trace-based grid route (whose real-axis integrand has no
/// determinant zeros and therefore tolerates much larger k-truncations).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Clearance (in units of |k|) between γ_k and every excluded point.
    pub clearance: f64,
    /// k-truncation of the outer integral on the contour route. Raising it
    /// buys accuracy only up to a point: the γ contour's flat top sits at
    /// ~(1 + clearance)·|k|, where the trace-part of the integrand grows
    /// like e^{cp·t·Im l} against the e^{−y·Im l} decay of the transform
    /// kernel, so double precision runs out of cancellation headroom near
    /// k·(cp·t − y) ≈ 30. The real-axis grid route has no such ceiling.
    pub gamma_k_max: f64,
    /// l-truncation of the contour and of the real-axis data integral.
    pub gamma_l_max: f64,
    /// l-truncation used by [`SolverSession::near_surface_trace`], where the
    /// weak oscillation at small y demands a longer tail.
    pub trace_l_max: f64,
    /// k-truncation of the trace-based grid route.
    pub grid_k_max: f64,
    /// l-truncation of the trace-based grid route.
    pub grid_l_max: f64,
    /// Half-width of the notch around k = 0 (the integrands are bounded
    /// there; the notch only avoids the 0/0 corner at k = l = 0).
    pub eps_k: f64,
    /// Multiplier on all panel densities (2.0 = twice as many panels).
    pub refine: f64,
    /// Target time step of the trace grid used by the grid route.
    pub s_step: f64,
    /// Smallest y served by `evaluate_uv` unless overridden; surface values
    /// come from [`SolverSession::surface_values`] instead.
    pub y_min: f64,
    /// Where the grid route takes its surface traces from.
    pub trace_source: TraceSource,
    /// Time resolution of the Volterra march when it is the trace source.
    pub volterra_steps_per_unit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            clearance: 0.25,
            gamma_k_max: 10.0,
            gamma_l_max: 40.0,
            trace_l_max: 150.0,
            grid_k_max: 55.0,
            grid_l_max: 60.0,
            eps_k: 1e-6,
            refine: 1.0,
            s_step: 0.005,
            y_min: 0.05,
            trace_source: TraceSource::Auto,
            volterra_steps_per_unit: 200,
        }
    }
}

/// One evaluated field point: real parts plus the magnitude of the raw
/// imaginary residue (a quadrature/reality diagnostic, not part of the
/// solution).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FieldValue {
    pub u: f64,
    pub v: f64,
    pub imag_residual: f64,
}

/// Provenance and accuracy metadata carried by every [`FieldGrid`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridMeta {
    /// Largest raw imaginary residue observed while assembling the grid.
    pub imag_residual: f64,
    /// Largest |real part| over the grid (the field scale the residue is
    /// judged against).
    pub field_scale: f64,
    pub normalization: Normalization,
    pub k_max: f64,
    pub l_max: f64,
    pub s_step: f64,
    pub trace_source: String,
    pub code_version: String,
    pub notes: Vec<String>,
}

/// Real displacement samples on a sorted (x, y, t) product grid with y > 0.
///
/// Values are stored row-major as `[(it * ny + iy) * nx + ix]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub meta: GridMeta,
}

impl FieldGrid {
    /// Build a grid, validating node ordering, positivity of y, and array
    /// shapes.
    pub fn new(
        x: Vec<f64>,
        y: Vec<f64>,
        t: Vec<f64>,
        u: Vec<f64>,
        v: Vec<f64>,
        meta: GridMeta,
    ) -> Result<Self> {
        for (name, nodes) in [("x", &x), ("y", &y), ("t", &t)] {
            if nodes.is_empty() {
                return Err(Error::InvalidParameter(format!("empty {name}-grid")));
            }
            if nodes.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "{name}-nodes must be strictly increasing"
                )));
            }
        }
        if y[0] <= 0.0 {
            return Err(Error::InvalidParameter("y-nodes must be positive".into()));
        }
        let n = x.len() * y.len() * t.len();
        if u.len() != n || v.len() != n {
            return Err(Error::InvalidParameter(format!(
                "field arrays have {} / {} entries, grid needs {n}",
                u.len(),
                v.len()
            )));
        }
        Ok(FieldGrid { x, y, t, u, v, meta })
    }

    /// Flat index of `(ix, iy, it)`.
    pub fn idx(&self, ix: usize, iy: usize, it: usize) -> usize {
        (it * self.y.len() + iy) * self.x.len() + ix
    }

    /// `(u, v)` at a node.
    pub fn value(&self, ix: usize, iy: usize, it: usize) -> (f64, f64) {
        let i = self.idx(ix, iy, it);
        (self.u[i], self.v[i])
    }
}

/// The four data-function values the elimination consumes: `N_P` evaluated
/// at `-l` and at `l12(l)`, `N_Q` evaluated at `-l` and at `l21(l)`.
#[derive(Debug, Clone, Copy)]
pub struct NValues {
    pub np_at_minus_l: C64,
    pub np_at_l12: C64,
    pub nq_at_minus_l: C64,
    pub nq_at_l21: C64,
}

/// Data-only values of the four time-transform unknowns.
///
/// `u1, v1` are the pressure-family pair (denominator Δ₂); `u2, v2` the
/// shear-family pair (denominator Δ₁).
#[derive(Debug, Clone, Copy)]
pub struct Eliminated {
    pub u1: C64,
    pub u2: C64,
    pub v1: C64,
    pub v2: C64,
}

/// Solve the two 2×2 systems that the evaluated global relations form for
/// the boundary-transform unknowns, with the half-plane transform terms
/// dropped — for y > 0 those terms are analytic and decaying below γ_k, so
/// their contour integrals vanish by downward closure.
///
/// Each unknown carries its own determinant: the shear family
/// `(V2, U2) = ([C4·(-N_P(l12)) - C2·(-N_Q(-l))], [C1·(-N_Q(-l)) - C3·(-N_P(l12))])/Δ₁`
/// (written out below) and the pressure family with `Δ₂`.
pub fn eliminate_unknowns(mat: &Material, k: f64, l: C64, n: &NValues) -> Result<Eliminated> {
    let cf = coeffs(mat, k, l)?;
    let d1 = delta(1, mat, k, l)?;
    let d2 = delta(2, mat, k, l)?;
    let s = k * k + l.norm_sqr();
    if d1.norm() < 1e-12 * (mat.mu * mat.mu) * s * s {
        return Err(Error::DeterminantNearZero { which: 1, value: d1.norm() });
    }
    if d2.norm() < 1e-12 * (mat.pmod() * mat.pmod()) * s * s {
        return Err(Error::DeterminantNearZero { which: 2, value: d2.norm() });
    }
    Ok(Eliminated {
        v2: (-cf.c4 * n.np_at_l12 + cf.c2 * n.nq_at_minus_l) / d1,
        u2: (cf.c3 * n.np_at_l12 - cf.c1 * n.nq_at_minus_l) / d1,
        v1: (-cf.d4 * n.np_at_minus_l + cf.d2 * n.nq_at_l21) / d2,
        u1: (cf.d3 * n.np_at_minus_l - cf.d1 * n.nq_at_l21) / d2,
    })
}

/// A problem bound to its spectral certificates (determinant zero sets) and
/// evaluation options. Construction locates the zeros once; every contour
/// built afterwards re-verifies its exclusion certificate against them.
#[derive(Debug, Clone)]
pub struct SolverSession {
    pub problem: ProblemSpec,
    pub opts: SolverOptions,
    zeros: (ZeroSet, ZeroSet),
}

impl SolverSession {
    pub fn new(problem: ProblemSpec) -> Result<Self> {
        Self::with_options(problem, SolverOptions::default())
    }

    pub fn with_options(problem: ProblemSpec, opts: SolverOptions) -> Result<Self> {
        problem.validate()?;
        if opts.clearance <= 0.0 || opts.refine <= 0.0 || opts.s_step <= 0.0 {
            return Err(Error::InvalidParameter(
                "clearance, refine, and s_step must be positive".into(),
            ));
        }
        let zeros = (delta_zeros(1, &problem.material)?, delta_zeros(2, &problem.material)?);
        Ok(SolverSession { problem, opts, zeros })
    }

    /// The Δ₁ / Δ₂ zero sets backing the contour certificates.
    pub fn zero_sets(&self) -> (&ZeroSet, &ZeroSet) {
        (&self.zeros.0, &self.zeros.1)
    }

    /// Evaluate `(u, v)` at one interior point by direct quadrature of both
    /// double integrals: the γ_k integral of the eliminated unknowns and the
    /// real-axis integral of the `N_P`/`N_Q` parity combinations. The outer
    /// k-integral is evaluated two-sided, so the imaginary residue reported
    /// is a genuine reality diagnostic.
    pub fn evaluate_uv(&self, x: f64, y: f64, t: f64) -> Result<FieldValue> {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("t = {t} must be nonnegative")));
        }
        if y < self.opts.y_min {
            return Err(Error::InvalidParameter(format!(
                "y = {y} below y_min = {}; lower opts.y_min to override, or use \
                 surface_values for y = 0",
                self.opts.y_min
            )));
        }
        gamma_route::evaluate_point(self, x, y, t)
    }

    /// The k-mode of the field at height y: `ũ(k, y, t)` such that
    /// `u(x,y,t) = (1/2π) ∫ e^{ikx} ũ(k,y,t) dk`, computed from the contour
    /// route's inner integrals (independent of the Laplace/Volterra traces).
    pub fn gamma_trace(&self, k: f64, y: f64, t: f64) -> Result<(C64, C64)> {
        if y < 0.0 || t < 0.0 {
            return Err(Error::InvalidParameter("gamma_trace needs y >= 0, t >= 0".into()));
        }
        gamma_route::k_mode(self, k, y, t)
    }

    /// Surface trace `(ũ, ṽ)(k, 0, t)` by Richardson extrapolation of the
    /// contour-route k-modes from `y0` and `2 y0` (error O(y0²)).
    pub fn near_surface_trace(&self, k: f64, ts: &[f64], y0: f64) -> Result<BoundaryTrace> {
        gamma_route::near_surface(self, k, ts, y0)
    }

    /// Evaluate the field on a product grid through computed surface traces:
    /// with `û(k,0,s)`, `v̂(k,0,s)` known, the contour integrand becomes
    /// entire in l and γ_k collapses onto the real axis; running Filon
    /// integrals in s then serve every output time in one pass per (k, l).
    pub fn evaluate_grid(&self, xs: &[f64], ys: &[f64], ts: &[f64]) -> Result<FieldGrid> {
        trace_route::evaluate_grid(self, xs, ys, ts)
    }

    /// Surface displacements `u(x, 0, t)`, `v(x, 0, t)` synthesized from the
    /// boundary traces (the y = 0 values the interior routes exclude).
    pub fn surface_values(&self, xs: &[f64], ts: &[f64]) -> Result<SurfaceField> {
        trace_route::surface_values(self, xs, ts)
    }
}

/// One-call form of [`SolverSession::evaluate_uv`] with default options.
pub fn evaluate_uv(problem: &ProblemSpec, x: f64, y: f64, t: f64) -> Result<FieldValue> {
    SolverSession::new(problem.clone())?.evaluate_uv(x, y, t)
}

/// Spatial footprint of the problem data: conservative bounds on how far the
/// initial data reaches in |x| and y and how far the forcing reaches in |x|
/// over `[0, t_max]`. The spectral transforms oscillate at these rates, so
/// quadrature densities must cover them on top of the evaluation point's own
/// coordinates.
pub(crate) fn data_extent(problem: &ProblemSpec, t_max: f64) -> (f64, f64) {
    let mut xe = 0.0f64;
    let mut ye = 0.0f64;
    match &problem.initial {
        InitialData::Zero => {}
        InitialData::GaussianFamily { u0, u1, v0, v1 } => {
            for b in u0.iter().chain(u1).chain(v0).chain(v1) {
                xe = xe.max(b.x0.abs() + 3.0 * b.width);
                ye = ye.max(b.y0 + 3.0 * b.width);
            }
        }
        InitialData::Sampled(s) => {
            xe = xe.max(s.x0.abs()).max((s.x0 + (s.nx - 1) as f64 * s.dx).abs());
            ye = ye.max((s.ny - 1) as f64 * s.dy);
        }
    }
    match &problem.forcing {
        BoundaryForcing::None => {}
        BoundaryForcing::TangentialLineLoad { mollify_eps, .. }
        | BoundaryForcing::NormalLineLoad { mollify_eps, .. } => {
            xe = xe.max(4.0 * mollify_eps);
        }
        BoundaryForcing::MovingNormalLoad { speed, mollify_eps, .. } => {
            xe = xe.max(speed.abs() * t_max + 4.0 * mollify_eps);
        }
        BoundaryForcing::Sampled(s) => {
            xe = xe.max(s.x0.abs()).max((s.x0 + (s.nx - 1) as f64 * s.dx).abs());
        }
    }
    (xe, ye)
}

// ---------------------------------------------------------------------------
// shared quadrature helpers
// ---------------------------------------------------------------------------

pub(crate) fn gl15() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(15))
}

pub(crate) fn gl12() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(12))
}

/// Gauss–Legendre nodes/weights over `[a, b]` split into `npan` panels.
pub(crate) fn real_panels(
    a: f64,
    b: f64,
    npan: usize,
    rule: &(Vec<f64>, Vec<f64>),
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(npan * rule.0.len());
    let step = (b - a) / npan as f64;
    for p in 0..npan {
        let lo = a + p as f64 * step;
        let half = 0.5 * step;
        let mid = lo + half;
        for (&xi, &wi) in rule.0.iter().zip(&rule.1) {
            out.push((mid + half * xi, half * wi));
        }
    }
    out
}

/// Same along a straight segment between complex endpoints; weights carry
/// the complex direction factor.
pub(crate) fn complex_panels(
    a: C64,
    b: C64,
    npan: usize,
    rule: &(Vec<f64>, Vec<f64>),
) -> Vec<(C64, C64)> {
    let mut out = Vec::with_capacity(npan * rule.0.len());
    let d = b - a;
    for p in 0..npan {
        let t0 = p as f64 / npan as f64;
        let t1 = (p + 1) as f64 / npan as f64;
        let half = 0.5 * (t1 - t0);
        let mid = 0.5 * (t0 + t1);
        for (&xi, &wi) in rule.0.iter().zip(&rule.1) {
            out.push((a + (mid + half * xi) * d, half * wi * d));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// residual diagnostics
// ---------------------------------------------------------------------------

/// Interior equation-of-motion residual of a grid, by centered second-order
/// differences.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PdeResidual {
    /// RMS residual over the RMS of the individual equation terms.
    pub rel: f64,
    /// RMS of the residual itself.
    pub residual_rms: f64,
    /// RMS of the individual terms (the cancellation scale).
    pub term_rms: f64,
}

fn uniform_step(nodes: &[f64], name: &str) -> Result<f64> {
    if nodes.len() < 3 {
        return Err(Error::GridTooCoarse(format!(
            "{name}-grid needs at least 3 nodes for second differences"
        )));
    }
    let h = nodes[1] - nodes[0];
    for w in nodes.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::GridTooCoarse(format!(
                "{name}-grid must be uniform for finite differences"
            )));
        }
    }
    Ok(h)
}

/// Relative residual of the interior equations of motion
/// `u_tt = cp² u_xx + cs² u_yy + (λ+μ) v_xy` (and the v-counterpart) over
/// all interior nodes of the grid.
pub fn pde_residual(mat: &Material, grid: &FieldGrid) -> Result<PdeResidual> {
    let hx = uniform_step(&grid.x, "x")?;
    let hy = uniform_step(&grid.y, "y")?;
    let ht = uniform_step(&grid.t, "t")?;
    let (nx, ny, nt) = (grid.x.len(), grid.y.len(), grid.t.len());
    let cp2 = mat.pmod();
    let cs2 = mat.mu;
    let lm = mat.lambda + mat.mu;
    let mut num = 0.0;
    let mut den = 0.0;
    let at = |f: &[f64], ix: usize, iy: usize, it: usize| f[(it * ny + iy) * nx + ix];
    for it in 1..nt - 1 {
        for iy in 1..ny - 1 {
            for ix in 1..nx - 1 {
                let d2 = |f: &[f64], dx: usize, dy: usize, dt: usize, h: f64| {
                    (at(f, ix + dx, iy + dy, it + dt) - 2.0 * at(f, ix, iy, it)
                        + at(f, ix - dx, iy - dy, it - dt))
                        / (h * h)
                };
                let cross = |f: &[f64]| {
                    (at(f, ix + 1, iy + 1, it) - at(f, ix - 1, iy + 1, it)
                        - at(f, ix + 1, iy - 1, it)
                        + at(f, ix - 1, iy - 1, it))
                        / (4.0 * hx * hy)
                };
                let u_tt = d2(&grid.u, 0, 0, 1, ht);
                let u_xx = d2(&grid.u, 1, 0, 0, hx);
                let u_yy = d2(&grid.u, 0, 1, 0, hy);
                let v_tt = d2(&grid.v, 0, 0, 1, ht);
                let v_xx = d2(&grid.v, 1, 0, 0, hx);
                let v_yy = d2(&grid.v, 0, 1, 0, hy);
                let u_xy = cross(&grid.u);
                let v_xy = cross(&grid.v);
                let ru = u_tt - cp2 * u_xx - cs2 * u_yy - lm * v_xy;
                let rv = v_tt - cs2 * v_xx - cp2 * v_yy - lm * u_xy;
                num += ru * ru + rv * rv;
                den += u_tt * u_tt
                    + (cp2 * u_xx).powi(2)
                    + (cs2 * u_yy).powi(2)
                    + (lm * v_xy).powi(2)
                    + v_tt * v_tt
                    + (cs2 * v_xx).powi(2)
                    + (cp2 * v_yy).powi(2)
                    + (lm * u_xy).powi(2);
            }
        }
    }
    if den == 0.0 {
        return Ok(PdeResidual { rel: 0.0, residual_rms: 0.0, term_rms: 0.0 });
    }
    let n_pts = ((nx - 2) * (ny - 2) * (nt - 2)) as f64;
    Ok(PdeResidual {
        rel: (num / den).sqrt(),
        residual_rms: (num / n_pts).sqrt(),
        term_rms: (den / n_pts).sqrt(),
    })
}

/// Physical-space initial data `(u0, u1, v0, v1)` at a point, matching the
/// transform conventions of [`crate::transforms::initial_transforms`].
pub fn initial_physical(data: &InitialData, x: f64, y: f64) -> (f64, f64, f64, f64) {
    match data {
        InitialData::Zero => (0.0, 0.0, 0.0, 0.0),
        InitialData::GaussianFamily { u0, u1, v0, v1 } => {
            let sum = |bumps: &[crate::transforms::GaussianBump]| {
                bumps
                    .iter()
                    .map(|b| {
                        let r2 = (x - b.x0).powi(2) + (y - b.y0).powi(2);
                        b.amplitude * (-r2 / (2.0 * b.width * b.width)).exp()
                    })
                    .sum::<f64>()
            };
            (sum(u0), sum(u1), sum(v0), sum(v1))
        }
        InitialData::Sampled(s) => {
            let sample = |f: &[f64]| {
                let fx = (x - s.x0) / s.dx;
                let fy = y / s.dy;
                if fx < 0.0 || fy < 0.0 || fx > (s.nx - 1) as f64 || fy > (s.ny - 1) as f64 {
                    return 0.0;
                }
                let ix = (fx.floor() as usize).min(s.nx - 2);
                let iy = (fy.floor() as usize).min(s.ny - 2);
                let (wx, wy) = (fx - ix as f64, fy - iy as f64);
                let g = |i: usize, j: usize| f[j * s.nx + i];
                g(ix, iy) * (1.0 - wx) * (1.0 - wy)
                    + g(ix + 1, iy) * wx * (1.0 - wy)
                    + g(ix, iy + 1) * (1.0 - wx) * wy
                    + g(ix + 1, iy + 1) * wx * wy
            };
            (sample(&s.u0), sample(&s.u1), sample(&s.v0), sample(&s.v1))
        }
    }
}

/// Physical-space boundary forcing `g_j(x, t)` (the normalized tractions
/// `σ_xy = μ g1`, `σ_yy = (λ+2μ) g2`). Exact line loads have no pointwise
/// value; they must be mollified first.
pub fn forcing_physical(forcing: &BoundaryForcing, mat: &Material, j: u8, x: f64, t: f64) -> Result<f64> {
    let gauss = |eps: f64, arg: f64| -> Result<f64> {
        if eps <= 0.0 {
            return Err(Error::InvalidParameter(
                "exact line load has no pointwise trace; set mollify_eps > 0".into(),
            ));
        }
        Ok((-arg * arg / (2.0 * eps * eps)).exp() / (eps * (2.0 * PI).sqrt()))
    };
    Ok(match forcing {
        BoundaryForcing::None => 0.0,
        BoundaryForcing::TangentialLineLoad { sigma0, profile, mollify_eps } => {
            if j == 1 {
                sigma0 / mat.mu * profile.eval(t) * gauss(*mollify_eps, x)?
            } else {
                0.0
            }
        }
        BoundaryForcing::NormalLineLoad { sigma0, profile, mollify_eps } => {
            if j == 2 {
                sigma0 / (mat.lambda + mat.mu) * profile.eval(t) * gauss(*mollify_eps, x)?
            } else {
                0.0
            }
        }
        BoundaryForcing::MovingNormalLoad { sigma0, speed, mollify_eps } => {
            if j == 2 {
                sigma0 / (mat.lambda + mat.mu) * gauss(*mollify_eps, x - speed * t)?
            } else {
                0.0
            }
        }
        BoundaryForcing::Sampled(s) => {
            let data = if j == 1 { &s.g1 } else { &s.g2 };
            let fx = (x - s.x0) / s.dx;
            let ft = t / s.dt;
            if fx < 0.0 || ft < 0.0 || fx > (s.nx - 1) as f64 || ft > (s.nt - 1) as f64 {
                0.0
            } else {
                let ix = (fx.floor() as usize).min(s.nx - 2);
                let it = (ft.floor() as usize).min(s.nt - 2);
                let (wx, wt) = (fx - ix as f64, ft - it as f64);
                let g = |i: usize, r: usize| data[r * s.nx + i];
                g(ix, it) * (1.0 - wx) * (1.0 - wt)
                    + g(ix + 1, it) * wx * (1.0 - wt)
                    + g(ix, it + 1) * (1.0 - wx) * wt
                    + g(ix + 1, it + 1) * wx * wt
            }
        }
    })
}

/// Full residual report for a computed grid: interior PDE residual, surface
/// boundary-condition residual, and t = 0 initial-condition residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub pde: PdeResidual,
    /// Surface traction residual relative to the RMS of its terms, or None
    /// when the forcing has no pointwise trace (exact line load).
    pub bc_rel: Option<f64>,
    /// Max |u(·,·,0) − u0| over the peak field, when t = 0 is on the grid.
    pub ic_rel: Option<f64>,
    /// Same for the one-sided-difference initial velocity.
    pub ic_velocity_rel: Option<f64>,
    pub field_scale: f64,
    pub notes: Vec<String>,
}

/// Diagnose a computed grid against the governing equations, the traction
/// boundary conditions (evaluated AT the surface, using trace-synthesized
/// surface values and thin layers at `y = h, 2h` for the normal
/// derivatives), and the initial conditions.
pub fn residuals(problem: &ProblemSpec, grid: &FieldGrid) -> Result<ResidualReport> {
    let mat = &problem.material;
    let pde = pde_residual(mat, grid)?;
    let field_scale = grid
        .u
        .iter()
        .chain(&grid.v)
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let mut notes = Vec::new();

    // initial conditions
    let mut ic_rel = None;
    let mut ic_velocity_rel = None;
    if grid.t[0].abs() < 1e-12 {
        let mut worst = 0.0f64;
        for (iy, &y) in grid.y.iter().enumerate() {
            for (ix, &x) in grid.x.iter().enumerate() {
                let (u0, _, v0, _) = initial_physical(&problem.initial, x, y);
                let (u, v) = grid.value(ix, iy, 0);
                worst = worst.max((u - u0).abs()).max((v - v0).abs());
            }
        }
        ic_rel = Some(if field_scale > 0.0 { worst / field_scale } else { worst });
        if grid.t.len() >= 3 {
            let ht = grid.t[1] - grid.t[0];
            let mut worst_v = 0.0f64;
            for (iy, &y) in grid.y.iter().enumerate() {
                for (ix, &x) in grid.x.iter().enumerate() {
                    let (_, u1, _, v1) = initial_physical(&problem.initial, x, y);
                    let du = (-3.0 * grid.value(ix, iy, 0).0 + 4.0 * grid.value(ix, iy, 1).0
                        - grid.value(ix, iy, 2).0)
                        / (2.0 * ht);
                    let dv = (-3.0 * grid.value(ix, iy, 0).1 + 4.0 * grid.value(ix, iy, 1).1
                        - grid.value(ix, iy, 2).1)
                        / (2.0 * ht);
                    worst_v = worst_v.max((du - u1).abs()).max((dv - v1).abs());
                }
            }
            let v_scale = field_scale / grid.t.last().unwrap().max(1e-6);
            ic_velocity_rel = Some(worst_v / v_scale.max(1e-300));
        }
    } else {
        notes.push("t = 0 not on grid; IC residual skipped".into());
    }

    // boundary conditions at the surface
    let bc_rel = match surface_bc_residual(problem, grid) {
        Ok(r) => Some(r),
        Err(Error::InvalidParameter(msg)) => {
            notes.push(format!("BC residual skipped: {msg}"));
            None
        }
        Err(e) => return Err(e),
    };

    Ok(ResidualReport { pde, bc_rel, ic_rel, ic_velocity_rel, field_scale, notes })
}

/// Traction residual at y = 0: `u_y + v_x = g1`, `v_y + (λ/(λ+2μ)) u_x = g2`,
/// with surface values from the trace route, tangential derivatives by
/// centered differences along the surface, and normal derivatives by
/// second-order one-sided stencils through layers at `y = h, 2h`.
fn surface_bc_residual(problem: &ProblemSpec, grid: &FieldGrid) -> Result<f64> {
    let mat = &problem.material;
    // probe the forcing for a pointwise trace before doing any heavy work
    forcing_physical(&problem.forcing, mat, 1, grid.x[0], *grid.t.last().unwrap())?;
    let session = SolverSession::new(problem.clone())?;
    let h = uniform_step(&grid.y, "y").unwrap_or(grid.y[0]);
    let surf = session.surface_values(&grid.x, &grid.t)?;
    let layers = session.evaluate_grid(&grid.x, &[h, 2.0 * h], &grid.t)?;
    let hx = uniform_step(&grid.x, "x")?;
    let gamma = mat.lambda / mat.pmod();
    let (nx, nt) = (grid.x.len(), grid.t.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for it in 0..nt {
        let t = grid.t[it];
        for ix in 1..nx - 1 {
            let x = grid.x[ix];
            let s = |f: &[f64], i: usize| f[it * nx + i];
            let u_x = (s(&surf.u, ix + 1) - s(&surf.u, ix - 1)) / (2.0 * hx);
            let v_x = (s(&surf.v, ix + 1) - s(&surf.v, ix - 1)) / (2.0 * hx);
            let one_sided = |f0: f64, f1: f64, f2: f64| (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
            let u_y = one_sided(
                s(&surf.u, ix),
                layers.value(ix, 0, it).0,
                layers.value(ix, 1, it).0,
            );
            let v_y = one_sided(
                s(&surf.v, ix),
                layers.value(ix, 0, it).1,
                layers.value(ix, 1, it).1,
            );
            let g1 = forcing_physical(&problem.forcing, mat, 1, x, t)?;
            let g2 = forcing_physical(&problem.forcing, mat, 2, x, t)?;
            let r1 = u_y + v_x - g1;
            let r2 = v_y + gamma * u_x - g2;
            num += r1 * r1 + r2 * r2;
            den += u_y * u_y
                + v_x * v_x
                + g1 * g1
                + v_y * v_y
                + (gamma * u_x).powi(2)
                + g2 * g2;
        }
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((num / den).sqrt())
}

/// Check a computed grid against one global relation pair at `(k, l, t)`
/// with `Im l <= 0`: the half-plane transforms `k û + l v̂` and `l û − k v̂`
/// are formed from the grid by trapezoidal quadrature and compared against
/// the boundary-trace/data side. Returns the relative residual (worst of
/// the two relations).
pub fn global_relation_check(
    problem: &ProblemSpec,
    grid: &FieldGrid,
    k: f64,
    l: C64,
    t: f64,
) -> Result<f64> {
    if l.im > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "global relation holds for Im l <= 0, got {}",
            l.im
        )));
    }
    let it = grid
        .t
        .iter()
        .position(|&tv| (tv - t).abs() < 1e-9)
        .ok_or_else(|| Error::GridTooCoarse(format!("t = {t} is not a grid node")))?;

    let mat = &problem.material;
    let uh = transform2d(grid, &grid.u, it, k, l);
    let vh = transform2d(grid, &grid.v, it, k, l);
    let lhs_p = k * uh + l * vh;
    let lhs_q = l * uh - k * vh;

    let session = SolverSession::new(problem.clone())?;
    let (sgrid, ut, vt) = trace_route::traces_for(&session, k, &[t])?;
    let om1 = omega(1, mat, k, l)?;
    let om2 = omega(2, mat, k, l)?;
    let v1 = damped_time_transform(om1, &sgrid, &vt, t);
    let u1 = damped_time_transform(om1, &sgrid, &ut, t);
    let u2 = damped_time_transform(om2, &sgrid, &ut, t);
    let v2 = damped_time_transform(om2, &sgrid, &vt, t);
    let (np, nq) = n_pq(&problem.forcing, &problem.initial, mat, k, l, t)?;
    let cf = coeffs(mat, k, l)?;
    let mu = mat.mu;
    let rhs_p = cf.d1 * v1 + 2.0 * mu * k * l * u1 + np;
    let rhs_q = -mu * (C64::new(k * k, 0.0) - l * l) * u2 - 2.0 * mu * k * l * v2 + nq;

    let area = (grid.x.last().unwrap() - grid.x[0]) * (grid.y.last().unwrap() - grid.y[0]);
    let field_scale = grid.u.iter().chain(&grid.v).fold(0.0f64, |m, &v| m.max(v.abs()));
    let floor = 1e-12 * (1.0 + field_scale * area) * (1.0 + k.abs() + l.norm());
    let rel = |a: C64, b: C64| {
        let scale = a.norm().max(b.norm());
        if scale < floor {
            0.0
        } else {
            (a - b).norm() / scale
        }
    };
    Ok(rel(lhs_p, rhs_p).max(rel(lhs_q, rhs_q)))
}

/// Trapezoidal `∫∫ f e^{-i(kx + ly)} dx dy` over the grid at time index it.
fn transform2d(grid: &FieldGrid, f: &[f64], it: usize, k: f64, l: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let (nx, ny) = (grid.x.len(), grid.y.len());
    let wts = |nodes: &[f64], j: usize| -> f64 {
        let lo = if j == 0 { 0.0 } else { (nodes[j] - nodes[j - 1]) / 2.0 };
        let hi = if j + 1 == nodes.len() { 0.0 } else { (nodes[j + 1] - nodes[j]) / 2.0 };
        lo + hi
    };
    let mut acc = C64::new(0.0, 0.0);
    for (iy, &y) in grid.y.iter().enumerate() {
        let ey = (-i * l * y).exp() * wts(&grid.y, iy);
        let mut row = C64::new(0.0, 0.0);
        for (ix, &x) in grid.x.iter().enumerate() {
            row += f[(it * ny + iy) * nx + ix] * (-i * k * x).exp() * wts(&grid.x, ix);
        }
        acc += ey * row;
    }
    acc
}

/// `−(i/ω) ∫_0^t sin(ω(t−s)) f(s) ds` for trace samples on a
/// piecewise-uniform grid, valid for complex ω (Filon piecewise-linear in f,
/// exact in the oscillation).
pub(crate) fn damped_time_transform(
    om: C64,
    sgrid: &trace_route::SGrid,
    f: &[C64],
    t: f64,
) -> C64 {
    let i = C64::new(0.0, 1.0);
    let ep = osc_integral_pw(i * om, sgrid, f, t);
    let em = osc_integral_pw(-i * om, sgrid, f, t);
    let is = (ep - em) / (2.0 * i);
    let ic = (ep + em) * 0.5;
    let (s, c) = ((om * t).sin(), (om * t).cos());
    -(i / om) * (s * ic - c * is)
}

/// `∫_0^t e^{z s} f(s) ds` over the piecewise-uniform grid (t must be a
/// grid node; integration stops there).
fn osc_integral_pw(z: C64, sgrid: &trace_route::SGrid, f: &[C64], t: f64) -> C64 {
    let nodes = &sgrid.nodes;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..nodes.len() - 1 {
        if nodes[j] >= t - 1e-12 {
            break;
        }
        let h = nodes[j + 1] - nodes[j];
        let (a, b) = filon_moments(z * h);
        acc += h * (z * nodes[j]).exp() * (a * f[j] + b * f[j + 1]);
    }
    acc
}
