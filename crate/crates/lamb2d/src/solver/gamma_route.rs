//! Per-point evaluation by direct quadrature of the contour representation.
//!
//! For each outer wavenumber k the inner l-integral has two pieces: the
//! integral over the deformed path γ_k of the eliminated boundary unknowns
//! (poles at the determinant zeros and at l = ±ik sit below the path), and
//! a real-axis integral of parity combinations of the data functions `N_P`,
//! `N_Q` that is even in l by construction and therefore folds onto
//! `2∫_0^∞ cos(ly)·(...) dl` exactly. The outer k-integral is evaluated
//! two-sided so that the imaginary part of the result is a genuine
//! quadrature/reality diagnostic rather than being discarded by a parity
//! fold.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::contour::{build_gamma_k, ContourPath};
use crate::error::{Error, Result};
use crate::laplace::BoundaryTrace;
use crate::material::Material;
use crate::spectral::{coeffs, delta, delta_zeros, l_map_12, l_map_21, omega};
use crate::transforms::n_pq;

use super::{
    complex_panels, data_extent, eliminate_unknowns, gl15, real_panels, FieldValue, NValues,
    Normalization, ProblemSpec, SolverOptions, SolverSession,
};

const I: C64 = C64::new(0.0, 1.0);

/// The four data-function evaluations the elimination needs at spectral
/// point `(k, l)`: `N_P` at `-l` and at `l12(l)`, `N_Q` at `-l` and at
/// `l21(l)`. These reflected arguments all have non-positive imaginary part
/// when l lies on γ_k, which is what makes the half-plane transform terms
/// removable there.
pub fn n_values(problem: &ProblemSpec, k: f64, l: C64, t: f64) -> Result<NValues> {
    let mat = &problem.material;
    let l12 = l_map_12(mat, k, l)?.value;
    let l21 = l_map_21(mat, k, l)?.value;
    let (np_m, nq_m) = n_pq(&problem.forcing, &problem.initial, mat, k, -l, t)?;
    let (np_12, _) = n_pq(&problem.forcing, &problem.initial, mat, k, l12, t)?;
    let (_, nq_21) = n_pq(&problem.forcing, &problem.initial, mat, k, l21, t)?;
    Ok(NValues {
        np_at_minus_l: np_m,
        np_at_l12: np_12,
        nq_at_minus_l: nq_m,
        nq_at_l21: nq_21,
    })
}

/// γ_k-part integrand `(I_u, I_v)` at complex l: the eliminated unknowns
/// assembled into
/// `I_u = (2k D1 V1 - 4μk l² V2)/(k²+l²)`,
/// `I_v = (4μk l² U1 + 2μk(k²-l²) U2)/(k²+l²)`,
/// to be integrated against `e^{ily}` along γ_k.
pub fn gamma_integrand(problem: &ProblemSpec, k: f64, l: C64, t: f64) -> Result<(C64, C64)> {
    let mat = &problem.material;
    let n = n_values(problem, k, l, t)?;
    let e = eliminate_unknowns(mat, k, l, &n)?;
    let cf = coeffs(mat, k, l)?;
    let mu = mat.mu;
    let k2 = C64::new(k * k, 0.0);
    let s2 = k2 + l * l;
    let iu = (2.0 * k * cf.d1 * e.v1 - 4.0 * mu * k * l * l * e.v2) / s2;
    let iv = (4.0 * mu * k * l * l * e.u1 + 2.0 * mu * k * (k2 - l * l) * e.u2) / s2;
    Ok((iu, iv))
}

/// Real-axis data integrand `(I_u^N, I_v^N)` at real l:
/// `I_u^N = (k[N_P(l)+N_P(-l)] + l[N_Q(l)-N_Q(-l)])/(k²+l²)`,
/// `I_v^N = (l[N_P(l)-N_P(-l)] - k[N_Q(l)+N_Q(-l)])/(k²+l²)`.
/// Both combinations are even in l whatever the data, so the inner integral
/// folds exactly onto `2∫_0^∞ cos(ly)·(...) dl`.
pub fn axis_integrand(problem: &ProblemSpec, k: f64, l: f64, t: f64) -> Result<(C64, C64)> {
    let mat = &problem.material;
    let lc = C64::new(l, 0.0);
    let (np_p, nq_p) = n_pq(&problem.forcing, &problem.initial, mat, k, lc, t)?;
    let (np_m, nq_m) = n_pq(&problem.forcing, &problem.initial, mat, k, -lc, t)?;
    let s2 = k * k + l * l;
    let iu = (k * (np_p + np_m) + l * (nq_p - nq_m)) / s2;
    let iv = (l * (np_p - np_m) - k * (nq_p + nq_m)) / s2;
    Ok((iu, iv))
}

/// Panels for a path segment of length `len` when the integrand oscillates
/// at `rate` cycles-per-2π: 1.5·rate panels per unit length of 15-point
/// Gauss rule, floored at `floor`.
fn n_panels(len: f64, rate: f64, refine: f64, floor: usize) -> usize {
    ((len * 1.5 * rate * refine).ceil() as usize).max(floor)
}

/// Build γ_k, growing the l-truncation when the k-scaled contour footprint
/// does not fit inside the requested one (the integrand decays in |l|, so
/// the longer real-axis tails are cheap and harmless).
fn build_contour(session: &SolverSession, k: f64, l_max: f64) -> Result<ContourPath> {
    let mat = &session.problem.material;
    let zeros = (&session.zeros.0, &session.zeros.1);
    let mut lm = l_max;
    for _ in 0..10 {
        match build_gamma_k(mat, zeros, k, session.opts.clearance, lm) {
            Ok(path) => return Ok(path),
            Err(Error::InvalidParameter(_)) => lm *= 1.6,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidParameter(format!(
        "contour for k = {k} does not fit any tried l-truncation"
    )))
}

/// Inner l-integral at one k: γ_k-part against `e^{ily}` plus the folded
/// real-axis data part against `2cos(ly)`.
pub(super) fn inner_integrals(
    session: &SolverSession,
    k: f64,
    y: f64,
    t: f64,
    l_max: f64,
) -> Result<(C64, C64)> {
    let problem = &session.problem;
    let mat = &problem.material;
    let refine = session.opts.refine;
    let path = build_contour(session, k, l_max)?;
    let (_, y_ext) = data_extent(problem, t);
    let rate_p = (y + y_ext + mat.cp() * t).max(1.0);
    let mut su = C64::new(0.0, 0.0);
    let mut sv = C64::new(0.0, 0.0);
    for seg in &path.segments {
        let len = (seg.b - seg.a).norm();
        let npan = n_panels(len, rate_p, refine, 2);
        for (l, w) in complex_panels(seg.a, seg.b, npan, gl15()) {
            let (iu, iv) = gamma_integrand(problem, k, l, t)?;
            let e = (I * l * y).exp();
            su += w * e * iu;
            sv += w * e * iv;
        }
    }
    let rate_s = (y + y_ext + mat.cs() * t).max(1.0);
    let npan = n_panels(l_max, 0.5 * rate_s, refine, 4);
    for (l, w) in real_panels(0.0, l_max, npan, gl15()) {
        let (iu, iv) = axis_integrand(problem, k, l, t)?;
        let c = 2.0 * (l * y).cos();
        su += w * c * iu;
        sv += w * c * iv;
    }
    Ok((su, sv))
}

/// Two-sided outer k-quadrature of [`inner_integrals`] at one field point.
pub(super) fn evaluate_point(session: &SolverSession, x: f64, y: f64, t: f64) -> Result<FieldValue> {
    let opts = &session.opts;
    let mat = &session.problem.material;
    let pref = session.problem.normalization.prefactor();
    let (x_ext, _) = data_extent(&session.problem, t);
    let rate_k = (x.abs() + x_ext + mat.cp() * t).max(1.0);
    let npan = n_panels(opts.gamma_k_max, 0.5 * rate_k, opts.refine, 8);
    let nodes = real_panels(opts.eps_k, opts.gamma_k_max, npan, gl15());
    let parts: Vec<(C64, C64)> = nodes
        .par_iter()
        .map(|&(kk, w)| -> Result<(C64, C64)> {
            let (iu_p, iv_p) = inner_integrals(session, kk, y, t, opts.gamma_l_max)?;
            let (iu_m, iv_m) = inner_integrals(session, -kk, y, t, opts.gamma_l_max)?;
            let ep = (I * kk * x).exp();
            let em = (-I * kk * x).exp();
            Ok((w * (ep * iu_p + em * iu_m), w * (ep * iv_p + em * iv_m)))
        })
        .collect::<Result<_>>()?;
    let mut u = C64::new(0.0, 0.0);
    let mut v = C64::new(0.0, 0.0);
    for (du, dv) in parts {
        u += du;
        v += dv;
    }
    u *= pref;
    v *= pref;
    Ok(FieldValue { u: u.re, v: v.re, imag_residual: u.im.abs().max(v.im.abs()) })
}

/// The k-mode `ũ(k, y, t)` with `u(x,y,t) = (1/2π)∫ e^{ikx} ũ dk`: the inner
/// integrals carry everything except that 1/2π. Trace objects always use
/// this transform convention, independent of the problem's field-prefactor
/// choice.
pub(super) fn k_mode(session: &SolverSession, k: f64, y: f64, t: f64) -> Result<(C64, C64)> {
    k_mode_lmax(session, k, y, t, session.opts.gamma_l_max)
}

fn k_mode_lmax(session: &SolverSession, k: f64, y: f64, t: f64, l_max: f64) -> Result<(C64, C64)> {
    let (iu, iv) = inner_integrals(session, k, y, t, l_max)?;
    let c = 1.0 / (2.0 * std::f64::consts::PI);
    Ok((c * iu, c * iv))
}

/// Surface trace by Richardson extrapolation of the k-modes from heights
/// `y0` and `2 y0`: `2 f(y0) - f(2 y0)` cancels the O(y) term, leaving an
/// O(y0²) error. Uses the longer `trace_l_max` truncation because the
/// `e^{ily}` decay is weak near the surface.
pub(super) fn near_surface(
    session: &SolverSession,
    k: f64,
    ts: &[f64],
    y0: f64,
) -> Result<BoundaryTrace> {
    if y0 <= 0.0 {
        return Err(Error::InvalidParameter("Richardson base height must be positive".into()));
    }
    let lm = session.opts.trace_l_max;
    let vals: Vec<(C64, C64)> = ts
        .par_iter()
        .map(|&t| -> Result<(C64, C64)> {
            let (u1, v1) = k_mode_lmax(session, k, y0, t, lm)?;
            let (u2, v2) = k_mode_lmax(session, k, 2.0 * y0, t, lm)?;
            Ok((2.0 * u1 - u2, 2.0 * v1 - v2))
        })
        .collect::<Result<_>>()?;
    Ok(BoundaryTrace {
        k,
        t: ts.to_vec(),
        u: vals.iter().map(|p| p.0).collect(),
        v: vals.iter().map(|p| p.1).collect(),
    })
}

// ---------------------------------------------------------------------------
// closed-form route for the step line load (zero initial data)
// ---------------------------------------------------------------------------

/// `(1 - cos(ωt))/ω²`, series-stabilized for small |ωt|.
fn phi(om: C64, t: f64) -> C64 {
    let z = om * t;
    if z.norm() < 1e-3 {
        let z2 = z * z;
        (t * t) * (0.5 - z2 / 24.0 + z2 * z2 / 720.0)
    } else {
        (1.0 - z.cos()) / (om * om)
    }
}

/// Closed-form γ_k integrand for the normal step line load
/// `σ_yy(x, 0, t) = -σ0 δ(x) H(t)` with zero initial data: the general
/// elimination collapses because `N_P`, `N_Q` are proportional to
/// `(1-cos(ω_j t))/ω_j²`.
fn step_load_gamma(mat: &Material, sigma0: f64, k: f64, l: C64, t: f64) -> Result<(C64, C64)> {
    let mu = mat.mu;
    let kappa = mat.pmod() / (mat.lambda + mat.mu);
    let l12 = l_map_12(mat, k, l)?.value;
    let l21 = l_map_21(mat, k, l)?.value;
    let om1 = omega(1, mat, k, l)?;
    let om2 = omega(2, mat, k, l)?;
    let del1 = delta(1, mat, k, l)?;
    let del2 = delta(2, mat, k, l)?;
    let k2 = C64::new(k * k, 0.0);
    let d1 = mat.lambda * k2 + mat.pmod() * l * l;
    let s2 = k2 + l * l;
    let cc1 = 1.0 - (om1 * t).cos();
    let cc2 = 1.0 - (om2 * t).cos();
    let (ph1, ph2) = (phi(om1, t), phi(om2, t));
    let iu = -(sigma0 * kappa) / s2
        * (2.0 * k * l * d1 * cc1 / del2 + 4.0 * mu * k * l * l * l12 * cc2 / del1);
    let iv = -(sigma0 * kappa) / s2
        * (4.0 * mu * k * k * l * l * (2.0 * mu * l * l21 + d1) * ph1 / del2
            - 2.0 * mu * mu * k * k * (k2 - l * l) * ((k2 - l * l) - 2.0 * l * l12) * ph2 / del1);
    Ok((iu, iv))
}

/// Closed-form axis integrand for the same problem: the u-combination
/// cancels identically and the v-combination is
/// `-2σ0 κ (l²φ1 + k²φ2)/(k²+l²)`.
fn step_load_axis(mat: &Material, sigma0: f64, k: f64, l: f64, t: f64) -> Result<C64> {
    let kappa = mat.pmod() / (mat.lambda + mat.mu);
    let lc = C64::new(l, 0.0);
    let om1 = omega(1, mat, k, lc)?;
    let om2 = omega(2, mat, k, lc)?;
    let s2 = k * k + l * l;
    Ok(-2.0 * sigma0 * kappa * (l * l * phi(om1, t) + k * k * phi(om2, t)) / s2)
}

/// Evaluate the step-line-load field through the closed-form integrands,
/// with the parity-folded outer integral (`2i sin(kx)` against the odd
/// u-part, `2cos(kx)` against the even v-part). This is an independent
/// implementation path used to cross-check [`SolverSession::evaluate_uv`]
/// on the one problem where the elimination collapses by hand.
pub fn evaluate_prop2(
    mat: &Material,
    sigma0: f64,
    x: f64,
    y: f64,
    t: f64,
    opts: &SolverOptions,
    norm: Normalization,
) -> Result<FieldValue> {
    if sigma0 == 0.0 {
        return Ok(FieldValue { u: 0.0, v: 0.0, imag_residual: 0.0 });
    }
    if y < 0.0 || t < 0.0 {
        return Err(Error::InvalidParameter("needs y >= 0 and t >= 0".into()));
    }
    let zeros = (delta_zeros(1, mat)?, delta_zeros(2, mat)?);
    let refine = opts.refine;
    let rate_k = (x.abs() + mat.cp() * t).max(1.0);
    let npan = n_panels(opts.gamma_k_max, 0.5 * rate_k, refine, 8);
    let nodes = real_panels(opts.eps_k, opts.gamma_k_max, npan, gl15());
    let parts: Vec<(C64, C64)> = nodes
        .par_iter()
        .map(|&(k, w)| -> Result<(C64, C64)> {
            // γ_k part
            let mut lm = opts.gamma_l_max;
            let path = loop {
                match build_gamma_k(mat, (&zeros.0, &zeros.1), k, opts.clearance, lm) {
                    Ok(p) => break p,
                    Err(Error::InvalidParameter(_)) => lm *= 1.6,
                    Err(e) => return Err(e),
                }
            };
            let rate_p = (y + mat.cp() * t).max(1.0);
            let mut su = C64::new(0.0, 0.0);
            let mut sv = C64::new(0.0, 0.0);
            for seg in &path.segments {
                let len = (seg.b - seg.a).norm();
                for (l, wl) in complex_panels(seg.a, seg.b, n_panels(len, rate_p, refine, 2), gl15())
                {
                    let (iu, iv) = step_load_gamma(mat, sigma0, k, l, t)?;
                    let e = (I * l * y).exp();
                    su += wl * e * iu;
                    sv += wl * e * iv;
                }
            }
            // folded axis part (u-part is identically zero here)
            let rate_s = (y + mat.cs() * t).max(1.0);
            let npan_n = n_panels(opts.gamma_l_max, 0.5 * rate_s, refine, 4);
            let mut svn = C64::new(0.0, 0.0);
            for (l, wl) in real_panels(0.0, opts.gamma_l_max, npan_n, gl15()) {
                svn += wl * 2.0 * (l * y).cos() * step_load_axis(mat, sigma0, k, l, t)?;
            }
            let du = w * 2.0 * I * (k * x).sin() * su;
            let dv = w * 2.0 * (k * x).cos() * (sv + svn);
            Ok((du, dv))
        })
        .collect::<Result<_>>()?;
    let mut u = C64::new(0.0, 0.0);
    let mut v = C64::new(0.0, 0.0);
    for (du, dv) in parts {
        u += du;
        v += dv;
    }
    let pref = norm.prefactor();
    u *= pref;
    v *= pref;
    Ok(FieldValue { u: u.re, v: v.re, imag_residual: u.im.abs().max(v.im.abs()) })
}
