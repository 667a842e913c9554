//! Laplace-transform route along the boundary.
//!
//! Transforming the two global relations in time (at fixed wavenumber `k`)
//! and evaluating them at the lower-half-plane spectral roots
//! `l_j* = -i w_j / c_j` turns them into a 2x2 linear system for the
//! transformed surface displacements `(ũ°, ṽ°)(k, p)`. This module solves
//! that system in closed form, exposes the Rayleigh denominator `R(k, p)`
//! with its zeros, and provides numerical inversion back to the time domain
//! ([`invert`]) plus an independent time-marching formulation ([`volterra`]).

pub mod invert;
pub mod volterra;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::Material;
use crate::transforms::{g_tilde, initial_transforms, BoundaryForcing, InitialData, TimeProfile};

const I: C64 = C64::new(0.0, 1.0);

/// Laplace-domain spectral data at one `(k, p)`.
///
/// Both radicals `w_j = (p² + c_j² k²)^{1/2}` take the principal branch,
/// which keeps `Re w_j > 0` throughout the right half p-plane.
#[derive(Debug, Clone, Copy)]
pub struct LaplacePoint {
    pub p: C64,
    pub w1: C64,
    pub w2: C64,
    /// The spectral determinant in Laplace variables, `R / (w1² w2²)`.
    pub delta: C64,
}

/// Evaluate the Laplace-domain radicals and normalized determinant.
/// Requires `Re p > 0`.
pub fn laplace_point(mat: &Material, k: f64, p: C64) -> Result<LaplacePoint> {
    if !(p.re > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Laplace evaluation requires Re p > 0, got p = {p}"
        )));
    }
    let w1 = (p * p + mat.pmod() * k * k).sqrt();
    let w2 = (p * p + mat.mu * k * k).sqrt();
    debug_assert!(w1.re > 0.0 && w2.re > 0.0);
    let delta = rayleigh_r(mat, k, p) / (w1 * w1 * w2 * w2);
    Ok(LaplacePoint { p, w1, w2, delta })
}

/// The Rayleigh denominator
/// `R(k, p) = (p² + 2μk²)² - 4μk² (μ/(λ+2μ))^{1/2} w1 w2`,
/// with principal-branch radicals (total on the whole p-plane).
pub fn rayleigh_r(mat: &Material, k: f64, p: C64) -> C64 {
    let w1 = (p * p + mat.pmod() * k * k).sqrt();
    let w2 = (p * p + mat.mu * k * k).sqrt();
    let sig = p * p + 2.0 * mat.mu * k * k;
    sig * sig - 4.0 * (mat.mu / mat.pmod()).sqrt() * mat.mu * k * k * w1 * w2
}

/// Natural size of `R` at `(k, p)` (it is homogeneous of degree 4).
fn r_scale(mat: &Material, k: f64, p: C64) -> f64 {
    let s = p.norm().max(mat.cp() * k.abs()).max(1e-150);
    s * s * s * s
}

fn guard_rayleigh(mat: &Material, k: f64, p: C64) -> Result<C64> {
    let r = rayleigh_r(mat, k, p);
    let scale = r_scale(mat, k, p);
    if r.norm() < 1e-10 * scale {
        return Err(Error::RayleighPole(r.norm() / scale));
    }
    Ok(r)
}

/// Load-to-displacement transfer matrix: `(ũ°, ṽ°) = S (g̃1°, g̃2°)`
/// for zero initial data.
///
/// Errors with [`Error::RayleighPole`] when `p` is too close to a zero of
/// `R(k, ·)` for the entries to be meaningful.
pub fn s_matrix(mat: &Material, k: f64, p: C64) -> Result<[[C64; 2]; 2]> {
    let lp = laplace_point(mat, k, p)?;
    let (w1, w2) = (lp.w1, lp.w2);
    let r = guard_rayleigh(mat, k, p)?;
    let (mu, pm) = (mat.mu, mat.pmod());
    let sig = p * p + 2.0 * mu * k * k;
    let s11 = -mu.sqrt() * p * p * w2 / r;
    let s12 = I * k * (pm * sig - 2.0 * (mu * pm).sqrt() * w1 * w2) / r;
    let s21 = I * k * (2.0 * mu * (mu / pm).sqrt() * w1 * w2 - mu * sig) / r;
    let s22 = -pm.sqrt() * p * p * w1 / r;
    Ok([[s11, s12], [s21, s22]])
}

/// `∫_0^τ e^{-pt} t^n dt`, stable for small `|pτ|`.
fn exp_moment(n: u32, p: C64, tau: f64) -> C64 {
    let x = p * tau;
    if x.norm() < 0.5 {
        // τ^{n+1} Σ_j (-pτ)^j / (j! (n+j+1))
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term / (n as f64 + 1.0);
        for j in 1..40 {
            term *= -x / j as f64;
            let inc = term / (n as f64 + j as f64 + 1.0);
            sum += inc;
            if inc.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum * tau.powi(n as i32 + 1)
    } else {
        // n!/p^{n+1} (1 - e^{-pτ} Σ_{m<=n} (pτ)^m / m!)
        let mut fact = 1.0;
        let mut pow = C64::new(1.0, 0.0);
        let mut inner = C64::new(1.0, 0.0);
        for m in 1..=n {
            fact *= m as f64;
            pow *= x;
            inner += pow / fact;
        }
        fact / p.powu(n + 1) * (C64::new(1.0, 0.0) - (-x).exp() * inner)
    }
}

/// Laplace transform of a piecewise-linear function sampled at `m·dt`,
/// held constant at the last value afterwards.
fn piecewise_linear_laplace(p: C64, dt: f64, values: &[C64]) -> C64 {
    if values.is_empty() {
        return C64::new(0.0, 0.0);
    }
    let x = p * dt;
    // m0 = ∫_0^dt e^{-ps} ds, m1 = ∫_0^dt s e^{-ps} ds
    let (m0, m1) = if x.norm() < 1e-3 {
        let m0 = dt
            * (C64::new(1.0, 0.0) - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
                + x * x * x * x / 120.0);
        let m1 = dt
            * dt
            * (C64::new(0.5, 0.0) - x / 3.0 + x * x / 8.0 - x * x * x / 30.0
                + x * x * x * x / 144.0);
        (m0, m1)
    } else {
        let e = (-x).exp();
        ((1.0 - e) / p, (1.0 - (1.0 + x) * e) / (p * p))
    };
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..values.len() - 1 {
        let shift = (-p * (m as f64 * dt)).exp();
        acc += shift * (values[m] * m0 + (values[m + 1] - values[m]) / dt * m1);
    }
    let t_end = (values.len() - 1) as f64 * dt;
    acc + values[values.len() - 1] * (-p * t_end).exp() / p
}

/// Laplace transform `X°(p)` of a load time profile.
fn profile_laplace(profile: &TimeProfile, p: C64) -> C64 {
    match profile {
        TimeProfile::Heaviside => 1.0 / p,
        TimeProfile::SmoothedHeaviside { tau } => {
            // q(θ) = 10θ³ - 15θ⁴ + 6θ⁵ on [0, τ], then 1
            let t3 = exp_moment(3, p, *tau) / tau.powi(3);
            let t4 = exp_moment(4, p, *tau) / tau.powi(4);
            let t5 = exp_moment(5, p, *tau) / tau.powi(5);
            10.0 * t3 - 15.0 * t4 + 6.0 * t5 + (-p * *tau).exp() / p
        }
        TimeProfile::Sampled { dt, values } => {
            let vals: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
            piecewise_linear_laplace(p, *dt, &vals)
        }
    }
}

/// Laplace transform in time of the boundary forcing transform:
/// `g̃_j°(k, p) = ∫_0^∞ e^{-pt} g̃_j(k, t) dt`.
///
/// Sampled boundary data is treated as piecewise linear in time and held at
/// its final row afterwards (matching the time-domain evaluation).
pub fn boundary_laplace(
    forcing: &BoundaryForcing,
    mat: &Material,
    j: u8,
    k: f64,
    p: C64,
) -> Result<C64> {
    assert!(j == 1 || j == 2);
    if !(p.re > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Laplace evaluation requires Re p > 0, got p = {p}"
        )));
    }
    let moll = |eps: f64| (-k * k * eps * eps / 2.0).exp();
    Ok(match forcing {
        BoundaryForcing::None => C64::new(0.0, 0.0),
        BoundaryForcing::TangentialLineLoad { sigma0, profile, mollify_eps } => {
            if j == 1 {
                sigma0 / mat.mu * moll(*mollify_eps) * profile_laplace(profile, p)
            } else {
                C64::new(0.0, 0.0)
            }
        }
        BoundaryForcing::NormalLineLoad { sigma0, profile, mollify_eps } => {
            if j == 2 {
                sigma0 / (mat.lambda + mat.mu) * moll(*mollify_eps) * profile_laplace(profile, p)
            } else {
                C64::new(0.0, 0.0)
            }
        }
        BoundaryForcing::MovingNormalLoad { sigma0, speed, mollify_eps } => {
            if j == 2 {
                sigma0 / (mat.lambda + mat.mu) * moll(*mollify_eps) / (p + I * k * speed)
            } else {
                C64::new(0.0, 0.0)
            }
        }
        BoundaryForcing::Sampled(s) => {
            let vals: Vec<C64> = (0..s.nt)
                .map(|m| g_tilde(forcing, mat, j, k, m as f64 * s.dt))
                .collect::<Result<_>>()?;
            piecewise_linear_laplace(p, s.dt, &vals)
        }
    })
}

/// Closed-form transformed surface displacements `(ũ°, ṽ°)(k, p)`.
///
/// The Laplace-transformed global relations are evaluated at the
/// lower-half-plane roots `l1* = -i w1/c_p` and `l2* = -i w2/c_s` where the
/// unknown volume terms drop out, leaving
/// `b1 = μk g̃1° - i c_p w1 g̃2° - (p P0 + P1)(k, l1*)`,
/// `b2 = -i c_s w2 g̃1° - k(λ+2μ) g̃2° - (p Q0 + Q1)(k, l2*)`,
/// `ũ° = (2 c_s k w2 b1 - iσ b2)/R`,
/// `ṽ° = (-2(μ/c_p) k w1 b2 - iσ b1)/R`,  `σ = p² + 2μk²`.
pub fn laplace_solution(
    mat: &Material,
    forcing: &BoundaryForcing,
    data: &InitialData,
    k: f64,
    p: C64,
) -> Result<(C64, C64)> {
    let lp = laplace_point(mat, k, p)?;
    let (w1, w2) = (lp.w1, lp.w2);
    let r = guard_rayleigh(mat, k, p)?;
    let (mu, pm) = (mat.mu, mat.pmod());
    let (cp, cs) = (mat.cp(), mat.cs());
    let sig = p * p + 2.0 * mu * k * k;
    let g1o = boundary_laplace(forcing, mat, 1, k, p)?;
    let g2o = boundary_laplace(forcing, mat, 2, k, p)?;
    let l1 = -I * w1 / cp;
    let l2 = -I * w2 / cs;
    let (p0, p1, _, _) = initial_transforms(data, k, l1)?;
    let (_, _, q0, q1) = initial_transforms(data, k, l2)?;
    let b1 = mu * k * g1o - I * cp * w1 * g2o - (p * p0 + p1);
    let b2 = -I * cs * w2 * g1o - k * pm * g2o - (p * q0 + q1);
    let uo = (2.0 * cs * k * w2 * b1 - I * sig * b2) / r;
    let vo = (-2.0 * (mu / cp) * k * w1 * b2 - I * sig * b1) / r;
    Ok((uo, vo))
}

/// Rayleigh-wave summary at wavenumber `k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayleighReport {
    /// Squared speed ratio `ξ = (c_R/c_s)²`.
    pub xi: f64,
    /// Rayleigh speed `c_R`.
    pub c_r: f64,
    /// Zeros of `R(k, ·)` in the p-plane (on the imaginary axis).
    pub zeros: Vec<C64>,
    /// Whether `μ/λ > 0.906`, the regime in which the real-axis field
    /// representation has no poles on the integration path.
    pub pole_free: bool,
}

/// Locate the Rayleigh zeros of `R(k, ·)`.
///
/// The speed ratio `q = c_R/c_s` is the unique root in (0, 1) of the
/// classical surface-wave function
/// `(2 - q²)² - 4 (1 - q²)^{1/2} (1 - γ q²)^{1/2}`, with `γ = μ/(λ+2μ)`;
/// the corresponding p-plane zeros are `±i c_R |k|`.
pub fn rayleigh_zeros(mat: &Material, k: f64) -> Result<RayleighReport> {
    if k == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let gam = mat.mu / mat.pmod();
    let f = |q: f64| -> f64 {
        (2.0 - q * q).powi(2) - 4.0 * (1.0 - q * q).sqrt() * (1.0 - gam * q * q).sqrt()
    };
    let (mut a, mut b) = (1e-6, 1.0 - 1e-15);
    if !(f(a) < 0.0 && f(b) > 0.0) {
        return Err(Error::RootSearchIncomplete { re: a, im: 0.0 });
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let q = 0.5 * (a + b);
    let c_r = q * mat.cs();
    let zeros = vec![I * c_r * k.abs(), -I * c_r * k.abs()];
    Ok(RayleighReport { xi: q * q, c_r, zeros, pole_free: mat.mu / mat.lambda > 0.906 })
}

/// Inversion abscissa for boundary transforms at wavenumber `k`: to the
/// right of every denominator zero (all on the imaginary p-axis) with a
/// k-proportional safety margin.
pub fn inversion_abscissa(mat: &Material, k: f64) -> f64 {
    let max_re = if k == 0.0 {
        0.0
    } else {
        match rayleigh_zeros(mat, k) {
            Ok(rep) => rep.zeros.iter().map(|z| z.re).fold(0.0, f64::max),
            Err(_) => 0.0,
        }
    };
    max_re + 0.1 * mat.cs() * k.abs()
}

/// Surface displacement transforms `(ũ, ṽ)(k, t)` on a shared time grid —
/// the common output of the Volterra march and of Laplace inversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub k: f64,
    pub t: Vec<f64>,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
}

/// Invert the closed-form Laplace solution over a time grid.
pub fn laplace_trace(
    mat: &Material,
    forcing: &BoundaryForcing,
    data: &InitialData,
    k: f64,
    t: &[f64],
    options: Option<invert::InversionOptions>,
) -> Result<BoundaryTrace> {
    let opts = options.unwrap_or(invert::InversionOptions {
        abscissa: inversion_abscissa(mat, k),
        ..Default::default()
    });
    let (u, _) = invert::invert_laplace(
        |p| laplace_solution(mat, forcing, data, k, p).map(|s| s.0),
        t,
        &opts,
    )?;
    let (v, _) = invert::invert_laplace(
        |p| laplace_solution(mat, forcing, data, k, p).map(|s| s.1),
        t,
        &opts,
    )?;
    Ok(BoundaryTrace { k, t: t.to_vec(), u, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::GaussianBump;

    fn mat() -> Material {
        Material::new(2.0, 1.0).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn heaviside_normal(sigma0: f64) -> BoundaryForcing {
        BoundaryForcing::NormalLineLoad {
            sigma0,
            profile: TimeProfile::Heaviside,
            mollify_eps: 0.0,
        }
    }

    /// Initial data shared by the frozen-value tests.
    fn gaussian_data() -> InitialData {
        let bump = |amplitude, x0, y0, width| GaussianBump { amplitude, x0, y0, width };
        InitialData::GaussianFamily {
            u0: vec![bump(1.0, 0.3, 0.8, 0.5)],
            v0: vec![bump(-0.7, -0.2, 0.5, 0.4)],
            u1: vec![bump(0.4, 0.0, 1.0, 0.6)],
            v1: vec![bump(0.9, 0.1, 0.7, 0.5)],
        }
    }

    #[test]
    fn laplace_point_radicals_and_delta() {
        // 20-digit reference values at λ=2, μ=1, k=1, p=1+1i
        let lp = laplace_point(&mat(), 1.0, c(1.0, 1.0)).unwrap();
        let w1 = c(2.0581710272714922503, 0.48586827175664567818);
        let w2 = c(1.2720196495140689643, 0.78615137775742328607);
        let delta = c(0.35278640450004206072, 0.44721359549995793928);
        assert!((lp.w1 - w1).norm() < 1e-14);
        assert!((lp.w2 - w2).norm() < 1e-14);
        assert!((lp.delta - delta).norm() < 1e-14);
        assert!(lp.w1.re > 0.0 && lp.w2.re > 0.0);
        assert!(laplace_point(&mat(), 1.0, c(-0.5, 1.0)).is_err());
    }

    #[test]
    fn laplace_radicals_stay_right_half_plane() {
        // principal branch keeps Re w_j > 0 across the right half p-plane
        let m = mat();
        for &k in &[0.0, 0.4, 1.0, 3.7] {
            for i in 0..200 {
                let th = -1.45 + 2.9 * (i as f64) / 199.0;
                let p = C64::from_polar(2.3, th);
                let lp = laplace_point(&m, k, p).unwrap();
                assert!(lp.w1.re > 0.0 && lp.w2.re > 0.0, "k={k} p={p}");
            }
        }
    }

    #[test]
    fn s_matrix_frozen_values() {
        // 20-digit references at λ=2, μ=1, k=1, p=1+1i
        let s = s_matrix(&mat(), 1.0, c(1.0, 1.0)).unwrap();
        let want = [
            [
                c(-0.49333239624272308729, 0.17969705844723366391),
                c(-0.2328242646066943138, 0.02748117662928909792),
            ],
            [
                c(0.05820606615167357845, -0.0068702941573222744801),
                c(-1.1630237929840018846, 0.92342771505435699941),
            ],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (s[i][j] - want[i][j]).norm() < 1e-14,
                    "S[{i}][{j}] = {}, want {}",
                    s[i][j],
                    want[i][j]
                );
            }
        }
    }

    #[test]
    fn s_matrix_diagonalizes_at_k_zero() {
        let m = mat();
        let p = c(0.9, 1.7);
        let s = s_matrix(&m, 0.0, p).unwrap();
        assert_eq!(s[0][1], c(0.0, 0.0));
        assert_eq!(s[1][0], c(0.0, 0.0));
        // w1 = w2 = p, R = p⁴: S11 = -√μ/p, S22 = -√(λ+2μ)/p
        assert!((s[0][0] - (-m.mu.sqrt() / p)).norm() < 1e-15);
        assert!((s[1][1] - (-m.pmod().sqrt() / p)).norm() < 1e-15);
    }

    #[test]
    fn rayleigh_pole_guard_triggers() {
        let m = mat();
        let rep = rayleigh_zeros(&m, 1.0).unwrap();
        // just off the imaginary axis next to the pole
        let p = rep.zeros[0] + c(1e-14, 0.0);
        match s_matrix(&m, 1.0, p) {
            Err(Error::RayleighPole(_)) => {}
            other => panic!("expected RayleighPole, got {other:?}"),
        }
    }

    #[test]
    fn heaviside_normal_load_transform() {
        // g̃2° = σ0 / ((λ+μ) p) for the Heaviside line load
        let m = mat();
        let p = c(1.3, -0.4);
        let got = boundary_laplace(&heaviside_normal(2.0), &m, 2, 0.7, p).unwrap();
        assert!((got - 2.0 / (3.0 * p)).norm() < 1e-15);
        let zero = boundary_laplace(&heaviside_normal(2.0), &m, 1, 0.7, p).unwrap();
        assert_eq!(zero, c(0.0, 0.0));
    }

    #[test]
    fn moving_load_transform() {
        let m = mat();
        let f = BoundaryForcing::MovingNormalLoad { sigma0: 1.5, speed: 2.0, mollify_eps: 0.0 };
        let (k, p) = (0.8, c(1.0, 0.5));
        let got = boundary_laplace(&f, &m, 2, k, p).unwrap();
        let want = 1.5 / 3.0 / (p + I * k * 2.0);
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn smoothed_and_sampled_profiles_match_quadrature() {
        // Laplace transforms of the ramp profiles against brute-force
        // quadrature of e^{-pt} X(t) (dense trapezoid + exact constant tail).
        let p = c(1.1, 0.8);
        let profiles = [
            TimeProfile::SmoothedHeaviside { tau: 0.8 },
            TimeProfile::Sampled {
                dt: 0.05,
                values: (0..25).map(|i| (i as f64 * 0.11).sin().abs()).collect(),
            },
        ];
        for profile in &profiles {
            let got = profile_laplace(profile, p);
            let t_end = 4.0;
            let n = 200_000;
            let h = t_end / n as f64;
            let mut acc = c(0.0, 0.0);
            for i in 0..=n {
                let t = i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc += w * h * (-p * t).exp() * profile.eval(t);
            }
            acc += profile.eval(t_end) * (-p * t_end).exp() / p;
            assert!(
                (got - acc).norm() < 1e-8,
                "profile {profile:?}: got {got}, quadrature {acc}"
            );
        }
    }

    #[test]
    fn solution_frozen_load_only() {
        // 20-digit reference: Heaviside normal load σ0=1, zero initial data
        let (uo, vo) = laplace_solution(
            &mat(),
            &heaviside_normal(1.0),
            &InitialData::Zero,
            1.0,
            c(1.0, 1.0),
        )
        .unwrap();
        assert!((uo - c(-0.034223847996234202647, 0.043384240205997235287)).norm() < 1e-15);
        assert!((vo - c(-0.039932679654940814203, 0.34774191800639314734)).norm() < 1e-15);
    }

    #[test]
    fn solution_matches_s_matrix_for_loads() {
        let m = mat();
        let f = BoundaryForcing::TangentialLineLoad {
            sigma0: 0.7,
            profile: TimeProfile::SmoothedHeaviside { tau: 0.5 },
            mollify_eps: 0.1,
        };
        for &(k, pre, pim) in &[(0.5, 1.0, 0.3), (2.0, 2.5, -1.2), (1.0, 0.7, 2.0)] {
            let p = c(pre, pim);
            let s = s_matrix(&m, k, p).unwrap();
            let g1 = boundary_laplace(&f, &m, 1, k, p).unwrap();
            let (uo, vo) = laplace_solution(&m, &f, &InitialData::Zero, k, p).unwrap();
            assert!((uo - s[0][0] * g1).norm() < 1e-13 * uo.norm().max(1e-3));
            assert!((vo - s[1][0] * g1).norm() < 1e-13 * vo.norm().max(1e-3));
        }
    }

    #[test]
    fn solution_frozen_with_initial_data() {
        // 20-digit reference: Heaviside normal load + Gaussian initial data.
        // The reference evaluates the half-plane transforms at l_j* by direct
        // numerical integration, so this also cross-validates the closed-form
        // scaled half-Gaussian used by initial_transforms.
        let (uo, vo) = laplace_solution(
            &mat(),
            &heaviside_normal(1.0),
            &gaussian_data(),
            1.0,
            c(1.0, 1.0),
        )
        .unwrap();
        assert!(
            (uo - c(0.33696382230421028733, -0.062230637662403073292)).norm() < 1e-12,
            "uo = {uo}"
        );
        assert!(
            (vo - c(-0.062443042275425992151, 0.26839676270520556206)).norm() < 1e-12,
            "vo = {vo}"
        );
    }

    #[test]
    fn solution_diagonalizes_at_k_zero() {
        let m = mat();
        let p = c(1.4, 0.6);
        let tangential = BoundaryForcing::TangentialLineLoad {
            sigma0: 1.0,
            profile: TimeProfile::Heaviside,
            mollify_eps: 0.0,
        };
        let (uo, vo) = laplace_solution(&m, &tangential, &InitialData::Zero, 0.0, p).unwrap();
        let g1 = boundary_laplace(&tangential, &m, 1, 0.0, p).unwrap();
        assert!((uo - (-m.mu.sqrt() * g1 / p)).norm() < 1e-15);
        assert_eq!(vo, c(0.0, 0.0));
        // normal load drives only v at k = 0
        let (uo, vo) =
            laplace_solution(&m, &heaviside_normal(1.0), &InitialData::Zero, 0.0, p).unwrap();
        assert_eq!(uo, c(0.0, 0.0));
        assert!(vo.norm() > 0.0);
    }

    #[test]
    fn rayleigh_root_against_cubic_oracle() {
        // ξ = (c_R/c_s)² solves ξ³ - 8ξ² + (24 - 16γ)ξ - 16(1 - γ) = 0:
        // squaring the surface-wave function turns it into this cubic, whose
        // root in (0, 1) is an independent oracle for the bisection search.
        for &(la, mu) in &[(2.0, 1.0), (1.0, 1.0), (0.5, 2.0), (3.7, 0.9)] {
            let m = Material::new(la, mu).unwrap();
            let gam = m.mu / m.pmod();
            let rep = rayleigh_zeros(&m, 1.0).unwrap();
            let cubic = |x: f64| x * x * x - 8.0 * x * x + (24.0 - 16.0 * gam) * x
                - 16.0 * (1.0 - gam);
            // bisection on (0, 1): cubic(0) < 0, cubic(1) = 1 - 8 + 24 - 16γ - 16 + 16γ = 1 > 0
            let (mut a, mut b) = (1e-9, 1.0 - 1e-12);
            assert!(cubic(a) < 0.0 && cubic(b) > 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if cubic(mid) < 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let xi_oracle = 0.5 * (a + b);
            assert!(
                (rep.xi - xi_oracle).abs() < 5e-4,
                "λ={la} μ={mu}: xi {} vs cubic {}",
                rep.xi,
                xi_oracle
            );
            assert!((rep.c_r - xi_oracle.sqrt() * m.cs()).abs() < 5e-4);
        }
    }

    #[test]
    fn rayleigh_frozen_speeds() {
        let rep = rayleigh_zeros(&mat(), 1.0).unwrap();
        assert!((rep.c_r - 0.9325259059311549266065).abs() < 1e-12);
        assert!((rep.xi - 0.8696045652327212071249).abs() < 1e-12);
        assert!(!rep.pole_free); // μ/λ = 0.5
        let m2 = Material::new(1.0, 1.0).unwrap();
        let rep2 = rayleigh_zeros(&m2, 1.0).unwrap();
        assert!((rep2.c_r - 0.9194016867619661219553).abs() < 1e-12);
        assert!(rep2.pole_free); // μ/λ = 1 > 0.906
        // the zeros live on the imaginary axis: no positive-real poles
        for z in rep2.zeros.iter().chain(rep.zeros.iter()) {
            assert_eq!(z.re, 0.0);
            assert!((rayleigh_r(&mat(), 1.0, rep.zeros[0])).norm() < 1e-10);
        }
    }

    #[test]
    fn rayleigh_zeros_scale_with_k() {
        let m = mat();
        let r1 = rayleigh_zeros(&m, 1.0).unwrap();
        let r2 = rayleigh_zeros(&m, 2.0).unwrap();
        for (a, b) in r1.zeros.iter().zip(r2.zeros.iter()) {
            assert!((2.0 * a - b).norm() < 1e-12);
        }
        assert_eq!(r1.c_r, r2.c_r);
        assert!(rayleigh_zeros(&m, 0.0).is_err());
    }

    #[test]
    fn rayleigh_r_homogeneity() {
        // R(2k, 2p) = 16 R(k, p)
        let m = mat();
        for &(k, pre, pim) in &[(0.7, 1.1, 0.9), (1.3, 0.2, -2.0), (2.0, 3.0, 0.0)] {
            let p = c(pre, pim);
            let lhs = rayleigh_r(&m, 2.0 * k, 2.0 * p);
            let rhs = 16.0 * rayleigh_r(&m, k, p);
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn abscissa_clears_the_poles() {
        let m = mat();
        for &k in &[0.5, 1.0, 4.0] {
            let a = inversion_abscissa(&m, k);
            let rep = rayleigh_zeros(&m, k).unwrap();
            for z in &rep.zeros {
                assert!(a > z.re);
            }
            assert!((a - 0.1 * m.cs() * k).abs() < 1e-12);
        }
        assert_eq!(inversion_abscissa(&m, 0.0), 0.0);
    }
}
