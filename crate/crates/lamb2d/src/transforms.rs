//! Known transforms of the boundary and initial data: the spatial
//! transforms `g~_j(k,t)`, the time integrals `g^(j)±`, `f^(j)±`, the
//! sine-kernel integrals `G^(j)`, `F^(j)`, the initial-data combinations
//! `P0, P1, Q0, Q1`, and the driving functions `N_P, N_Q`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::material::Material;
use crate::quad::{filon_moments, integrate_gl, integrate_oscillatory};
use crate::special::scaled_half_gaussian;
use crate::spectral::omega;

const I: C64 = C64::new(0.0, 1.0);

/// Time dependence of an applied line load.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum TimeProfile {
    /// Unit step at t = 0.
    Heaviside,
    /// C² ramp `q(θ) = ((6θ-15)θ+10)θ³` over `0 <= t <= tau`, then 1.
    SmoothedHeaviside { tau: f64 },
    /// Uniform samples of the profile starting at t = 0.
    Sampled { dt: f64, values: Vec<f64> },
}

impl TimeProfile {
    /// Profile value at time `t`.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self {
            TimeProfile::Heaviside => 1.0,
            TimeProfile::SmoothedHeaviside { tau } => {
                let th = t / tau;
                if th >= 1.0 {
                    1.0
                } else {
                    ((6.0 * th - 15.0) * th + 10.0) * th * th * th
                }
            }
            TimeProfile::Sampled { dt, values } => {
                let x = t / dt;
                let j = (x.floor() as usize).min(values.len().saturating_sub(1));
                if j + 1 >= values.len() {
                    *values.last().unwrap_or(&0.0)
                } else {
                    let w = x - j as f64;
                    values[j] * (1.0 - w) + values[j + 1] * w
                }
            }
        }
    }
}

/// Boundary tractions at y = 0, in the normalized form the field equations
/// use: `σ_xy = μ g1`, `σ_yy = (λ+2μ) g2`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum BoundaryForcing {
    /// Traction-free surface.
    None,
    /// `g1(x,t) = σ0 δ(x) X(t) / μ`; optionally mollified in x with a
    /// Gaussian of width `mollify_eps` (0 keeps the exact line load).
    TangentialLineLoad { sigma0: f64, profile: TimeProfile, mollify_eps: f64 },
    /// `g2(x,t) = σ0 δ(x) X(t) / (λ+μ)`, optionally mollified.
    NormalLineLoad { sigma0: f64, profile: TimeProfile, mollify_eps: f64 },
    /// `g2(x,t) = σ0 δ(x - C t) / (λ+μ)`, optionally mollified.
    MovingNormalLoad { sigma0: f64, speed: f64, mollify_eps: f64 },
    /// Sampled g1, g2 over a uniform (x, t) grid.
    Sampled(SampledBoundary),
}

impl Default for BoundaryForcing {
    fn default() -> Self {
        BoundaryForcing::None
    }
}

/// Uniformly sampled boundary data; row-major over time (index `ti*nx + xi`).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SampledBoundary {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub dt: f64,
    pub nt: usize,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
}

impl SampledBoundary {
    fn spatial_transform(&self, which: u8, row: usize, k: f64) -> C64 {
        let data = if which == 1 { &self.g1 } else { &self.g2 };
        let mut s = C64::new(0.0, 0.0);
        for xi in 0..self.nx {
            let x = self.x0 + xi as f64 * self.dx;
            s += data[row * self.nx + xi] * (-I * k * x).exp();
        }
        s * self.dx
    }

    fn check(&self, k: f64, t: f64) -> Result<()> {
        if k.abs() * self.dx > std::f64::consts::PI {
            return Err(Error::GridTooCoarse(format!(
                "sampled boundary grid dx = {} cannot represent k = {k}",
                self.dx
            )));
        }
        let t_max = (self.nt - 1) as f64 * self.dt;
        if t > t_max + 1e-12 {
            return Err(Error::GridTooCoarse(format!(
                "sampled boundary data ends at t = {t_max}, requested t = {t}"
            )));
        }
        Ok(())
    }
}

/// One Gaussian bump `A exp(-((x-x0)² + (y-y0)²) / (2 w²))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
}

/// Initial displacements and velocities on the half-plane.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum InitialData {
    Zero,
    /// Each field is a sum of Gaussian bumps; transforms are closed-form.
    GaussianFamily {
        u0: Vec<GaussianBump>,
        u1: Vec<GaussianBump>,
        v0: Vec<GaussianBump>,
        v1: Vec<GaussianBump>,
    },
    /// Uniform (x, y) grids covering y >= 0, row-major over y (index `yi*nx + xi`).
    Sampled(SampledInitial),
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Zero
    }
}

/// Uniformly sampled initial data starting at y = 0.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SampledInitial {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub dy: f64,
    pub ny: usize,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub v0: Vec<f64>,
    pub v1: Vec<f64>,
}

/// `(e^z - 1)/z`, stable near z = 0.
fn expm1_over(z: C64) -> C64 {
    if z.norm() < 1e-3 {
        // 1 + z/2 + z²/6 + z³/24 + z⁴/120
        C64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `(1 - cos(ω t)) / ω²`, stable near ω t = 0.
fn one_minus_cos_over_sq(om: C64, t: f64) -> C64 {
    let z = om * t;
    if z.norm() < 1e-3 {
        let z2 = z * z;
        t * t * (C64::new(0.5, 0.0) - z2 / 24.0 + z2 * z2 / 720.0)
    } else {
        (1.0 - (om * t).cos()) / (om * om)
    }
}

/// `sin(ω t) / ω`, stable near ω t = 0.
pub fn sin_over(om: C64, t: f64) -> C64 {
    let z = om * t;
    if z.norm() < 1e-3 {
        let z2 = z * z;
        t * (C64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0)
    } else {
        (om * t).sin() / om
    }
}

/// Moving-load oscillation integral
/// `Ψ(β, ω, t) = (1/ω) ∫_0^t sin(ω(t-s)) e^{-iβs} ds`
/// `           = (e^{-iβt} - cos(ωt) + i(β/ω) sin(ωt)) / (ω² - β²)`,
/// with series/limit forms near `ωt, βt -> 0` and near resonance `β = ±ω`.
pub fn moving_load_psi(beta: f64, om: C64, t: f64) -> C64 {
    let scale = om.norm().max(beta.abs()).max(1.0);
    if om.norm().max(beta.abs()) * t < 1e-3 {
        // double Taylor series through fourth order
        let b = C64::new(0.0, -beta); // -iβ
        let t2 = t * t;
        return t2 * 0.5 + b * (t2 * t / 6.0) + b * b * (t2 * t2 / 24.0)
            + b * b * b * (t2 * t2 * t / 120.0)
            - om * om * (t2 * t2 / 24.0)
            - om * om * b * (t2 * t2 * t / 120.0);
    }
    let res = |w: C64| -> C64 { (I * t * (-I * w * t).exp() - I * (w * t).sin() / w) / (2.0 * w) };
    if (om - beta).norm() < 1e-8 * scale {
        return res(om);
    }
    if (om + beta).norm() < 1e-8 * scale {
        return res(-om);
    }
    let num = (-I * beta * t).exp() - (om * t).cos() + I * beta * sin_over(om, t);
    num / (om * om - beta * beta)
}

/// Spatial Fourier transform `g~_j(k, t) = ∫ e^{-ikx} g_j(x, t) dx` of
/// boundary function `j` (1 tangential, 2 normal) at time `t`.
pub fn g_tilde(forcing: &BoundaryForcing, mat: &Material, j: u8, k: f64, t: f64) -> Result<C64> {
    assert!(j == 1 || j == 2);
    Ok(match forcing {
        BoundaryForcing::None => C64::new(0.0, 0.0),
        BoundaryForcing::TangentialLineLoad { sigma0, profile, mollify_eps } => {
            if j == 1 {
                let moll = (-k * k * mollify_eps * mollify_eps / 2.0).exp();
                C64::new(sigma0 / mat.mu * profile.eval(t) * moll, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }
        BoundaryForcing::NormalLineLoad { sigma0, profile, mollify_eps } => {
            if j == 2 {
                let moll = (-k * k * mollify_eps * mollify_eps / 2.0).exp();
                C64::new(sigma0 / (mat.lambda + mat.mu) * profile.eval(t) * moll, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }
        BoundaryForcing::MovingNormalLoad { sigma0, speed, mollify_eps } => {
            if j == 2 {
                let moll = (-k * k * mollify_eps * mollify_eps / 2.0).exp();
                sigma0 / (mat.lambda + mat.mu) * moll * (-I * k * speed * t).exp()
            } else {
                C64::new(0.0, 0.0)
            }
        }
        BoundaryForcing::Sampled(s) => {
            s.check(k, t)?;
            let x = t / s.dt;
            let row = (x.floor() as usize).min(s.nt - 1);
            if row + 1 >= s.nt {
                s.spatial_transform(j, row, k)
            } else {
                let w = x - row as f64;
                s.spatial_transform(j, row, k) * (1.0 - w)
                    + s.spatial_transform(j, row + 1, k) * w
            }
        }
    })
}

/// `∫_0^t e^{w s} f(s) ds` for uniformly sampled `f` (piecewise linear),
/// including the partial final segment when `t` is off-grid.
fn weighted_sampled_integral(w: C64, dt: f64, f: &[C64], t: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    let n_full = ((t / dt).floor() as usize).min(f.len().saturating_sub(1));
    let (a, b) = filon_moments(w * dt);
    for j in 0..n_full {
        let phase = (w * (j as f64 * dt)).exp();
        acc += dt * phase * (a * f[j] + b * f[j + 1]);
    }
    let s0 = n_full as f64 * dt;
    let rem = t - s0;
    if rem > 1e-14 && n_full + 1 < f.len() {
        let frac = rem / dt;
        let f_end = f[n_full] * (1.0 - frac) + f[n_full + 1] * frac;
        let (ar, br) = filon_moments(w * rem);
        acc += rem * (w * s0).exp() * (ar * f[n_full] + br * f_end);
    }
    acc
}

/// Time integral `∫_0^t e^{±iω_j s} g~_comp(k, s) ds` (the functions
/// `g^(j)±` for comp = 1 and `f^(j)±` for comp = 2).
pub fn time_integral(
    forcing: &BoundaryForcing,
    mat: &Material,
    comp: u8,
    j: u8,
    sign: i8,
    k: f64,
    l: C64,
    t: f64,
) -> Result<C64> {
    assert!(sign == 1 || sign == -1);
    let om = omega(j, mat, k, l)?;
    let w = I * (sign as f64) * om;
    Ok(match forcing {
        BoundaryForcing::None => C64::new(0.0, 0.0),
        BoundaryForcing::TangentialLineLoad { sigma0, profile, mollify_eps } => {
            if comp != 1 {
                return Ok(C64::new(0.0, 0.0));
            }
            let moll = (-k * k * mollify_eps * mollify_eps / 2.0).exp();
            sigma0 / mat.mu * moll * profile_weighted_integral(profile, w, t)
        }
        BoundaryForcing::NormalLineLoad { sigma0, profile, mollify_eps } => {
            if comp != 2 {
                return Ok(C64::new(0.0, 0.0));
            }
            let moll = (-k * k * mollify_eps * mollify_eps / 2.0).exp();
            sigma0 / (mat.lambda + mat.mu) * moll * profile_weighted_integral(profile, w, t)
        }
        BoundaryForcing::MovingNormalLoad { sigma0, speed, mollify_eps } => {
            if comp != 2 {
                return Ok(C64::new(0.0, 0.0));
            }
            let moll = (-k * k * mollify_eps * mollify_eps / 2.0).exp();
            // ∫ e^{(w - iβ)s} ds with β = kC
            let z = w - I * (k * speed);
            sigma0 / (mat.lambda + mat.mu) * moll * t * expm1_over(z * t)
        }
        BoundaryForcing::Sampled(s) => {
            s.check(k, t)?;
            let rows = ((t / s.dt).ceil() as usize + 1).min(s.nt);
            let f: Vec<C64> = (0..rows).map(|r| s.spatial_transform(comp, r, k)).collect();
            weighted_sampled_integral(w, s.dt, &f, t)
        }
    })
}

/// `∫_0^t e^{w s} X(s) ds` for an analytic time profile.
fn profile_weighted_integral(profile: &TimeProfile, w: C64, t: f64) -> C64 {
    match profile {
        TimeProfile::Heaviside => t * expm1_over(w * t),
        TimeProfile::SmoothedHeaviside { tau } => {
            let t_ramp = t.min(*tau);
            let ramp = integrate_oscillatory(
                |s| (w * s).exp() * profile.eval(s),
                0.0,
                t_ramp,
                w.norm(),
            );
            if t > *tau {
                // ∫_tau^t e^{ws} ds = e^{w tau} (t - tau) (e^{w(t-tau)} - 1)/(w(t-tau))
                ramp + (w * tau).exp() * (t - tau) * expm1_over(w * (t - tau))
            } else {
                ramp
            }
        }
        TimeProfile::Sampled { dt, values } => {
            let f: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
            weighted_sampled_integral(w, *dt, &f, t)
        }
    }
}

/// Sine-kernel integral `(i/ω_j) ∫_0^t sin(ω_j (s-t)) g~_comp(k,s) ds`,
/// equal to `(1/2ω_j)(e^{-iω_j t} g^{(j)+} - e^{iω_j t} g^{(j)-})`;
/// evaluated through a small-ω series when `|ω_j t| < 1e-3`.
fn sin_kernel(
    forcing: &BoundaryForcing,
    mat: &Material,
    comp: u8,
    j: u8,
    k: f64,
    l: C64,
    t: f64,
) -> Result<C64> {
    let om = omega(j, mat, k, l)?;
    // closed forms for the analytic loads
    match forcing {
        BoundaryForcing::None => return Ok(C64::new(0.0, 0.0)),
        BoundaryForcing::TangentialLineLoad { sigma0, profile, mollify_eps }
        | BoundaryForcing::NormalLineLoad { sigma0, profile, mollify_eps } => {
            let want = if matches!(forcing, BoundaryForcing::TangentialLineLoad { .. }) {
                1
            } else {
                2
            };
            if comp != want {
                return Ok(C64::new(0.0, 0.0));
            }
            let denom = if want == 1 { mat.mu } else { mat.lambda + mat.mu };
            let moll = (-k * k * mollify_eps * mollify_eps / 2.0).exp();
            let amp = sigma0 / denom * moll;
            return Ok(match profile {
                TimeProfile::Heaviside => -I * amp * one_minus_cos_over_sq(om, t),
                _ => amp * profile_sin_kernel(profile, om, t),
            });
        }
        BoundaryForcing::MovingNormalLoad { sigma0, speed, mollify_eps } => {
            if comp != 2 {
                return Ok(C64::new(0.0, 0.0));
            }
            let moll = (-k * k * mollify_eps * mollify_eps / 2.0).exp();
            let amp = sigma0 / (mat.lambda + mat.mu) * moll;
            // (i/ω)∫ sin(ω(s-t)) e^{-iβs} ds = -i Ψ(β, ω, t)
            return Ok(-I * amp * moving_load_psi(k * speed, om, t));
        }
        BoundaryForcing::Sampled(_) => {}
    }
    // sampled boundary: assemble from the two exponential time integrals
    if (om * t).norm() < 1e-3 {
        // kernel (i/ω) sin(ω(s-t)) = i(s-t) - iω²(s-t)³/6 + O(ω⁴)
        let BoundaryForcing::Sampled(s) = forcing else { unreachable!() };
        s.check(k, t)?;
        let rows = ((t / s.dt).ceil() as usize + 1).min(s.nt);
        let f: Vec<C64> = (0..rows).map(|r| s.spatial_transform(comp, r, k)).collect();
        let m1 = poly_sampled_integral(&f, s.dt, t, 1);
        let m3 = poly_sampled_integral(&f, s.dt, t, 3);
        return Ok(I * m1 - I * om * om / 6.0 * m3);
    }
    let gp = time_integral(forcing, mat, comp, j, 1, k, l, t)?;
    let gm = time_integral(forcing, mat, comp, j, -1, k, l, t)?;
    Ok(((-I * om * t).exp() * gp - (I * om * t).exp() * gm) / (2.0 * om))
}

/// `∫_0^t (s-t)^pow f(s) ds` for sampled `f` (piecewise linear, trapezoid).
fn poly_sampled_integral(f: &[C64], dt: f64, t: f64, pow: i32) -> C64 {
    let n = ((t / dt).floor() as usize).min(f.len().saturating_sub(1));
    let mut acc = C64::new(0.0, 0.0);
    let mut prev = f[0] * (0.0f64 - t).powi(pow);
    for jj in 1..=n {
        let s = jj as f64 * dt;
        let cur = f[jj] * (s - t).powi(pow);
        acc += 0.5 * dt * (prev + cur);
        prev = cur;
    }
    acc
}

/// Smooth-profile sine kernel `(i/ω)∫_0^t sin(ω(s-t)) X(s) ds` with the
/// ramp integrated by oscillation-resolving panels and the constant tail
/// closed-form; series kernel below `|ωt| = 1e-3`.
fn profile_sin_kernel(profile: &TimeProfile, om: C64, t: f64) -> C64 {
    if (om * t).norm() < 1e-3 {
        let lin = integrate_gl(|s| C64::new(profile.eval(s) * (s - t), 0.0), 0.0, t, 24);
        let cub = integrate_gl(|s| C64::new(profile.eval(s) * (s - t).powi(3), 0.0), 0.0, t, 24);
        return I * lin - I * om * om / 6.0 * cub;
    }
    match profile {
        TimeProfile::SmoothedHeaviside { tau } => {
            let t_ramp = t.min(*tau);
            let ramp = integrate_oscillatory(
                |s| I / om * (om * (s - t)).sin() * profile.eval(s),
                0.0,
                t_ramp,
                om.norm(),
            );
            if t > *tau {
                // (i/ω)∫_tau^t sin(ω(s-t)) ds = (i/ω²)(cos(ω(tau-t)) - 1)
                ramp + I / (om * om) * ((om * (tau - t)).cos() - 1.0)
            } else {
                ramp
            }
        }
        _ => {
            let wp = I * om;
            let gp = profile_weighted_integral(profile, wp, t);
            let gm = profile_weighted_integral(profile, -wp, t);
            ((-I * om * t).exp() * gp - (I * om * t).exp() * gm) / (2.0 * om)
        }
    }
}

/// The pair `(G^(j), F^(j))` at `(k, l, t)`: sine-kernel integrals of the
/// tangential and normal boundary transforms respectively.
pub fn big_gf(
    forcing: &BoundaryForcing,
    mat: &Material,
    j: u8,
    k: f64,
    l: C64,
    t: f64,
) -> Result<(C64, C64)> {
    Ok((
        sin_kernel(forcing, mat, 1, j, k, l, t)?,
        sin_kernel(forcing, mat, 2, j, k, l, t)?,
    ))
}

fn hat_gaussian(bumps: &[GaussianBump], k: f64, l: C64) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for b in bumps {
        let w = b.width;
        let x_part = (2.0 * std::f64::consts::PI).sqrt() * w
            * (-k * k * w * w / 2.0).exp()
            * (-I * k * b.x0).exp();
        s += b.amplitude * x_part * scaled_half_gaussian(l, b.y0, w);
    }
    s
}

fn hat_sampled(s: &SampledInitial, field: &[f64], k: f64, l: C64) -> Result<C64> {
    if l.im > 1e-12 {
        return Err(Error::DomainError { im_l: l.im });
    }
    if k.abs() * s.dx > std::f64::consts::PI || l.norm() * s.dy > std::f64::consts::PI {
        return Err(Error::GridTooCoarse(format!(
            "sampled initial grid (dx={}, dy={}) cannot represent (k={k}, l={l})",
            s.dx, s.dy
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for yi in 0..s.ny {
        let y = yi as f64 * s.dy;
        let wy = if yi == 0 || yi == s.ny - 1 { 0.5 } else { 1.0 };
        let ey = (-I * l * y).exp();
        let mut row = C64::new(0.0, 0.0);
        for xi in 0..s.nx {
            let x = s.x0 + xi as f64 * s.dx;
            row += field[yi * s.nx + xi] * (-I * k * x).exp();
        }
        acc += wy * ey * row;
    }
    Ok(acc * s.dx * s.dy)
}

/// Half-plane transforms of the four initial fields combined into
/// `P0 = k û0 + l v̂0`, `P1 = k û1 + l v̂1`,
/// `Q0 = l û0 - k v̂0`, `Q1 = l û1 - k v̂1`.
pub fn initial_transforms(data: &InitialData, k: f64, l: C64) -> Result<(C64, C64, C64, C64)> {
    let (u0h, u1h, v0h, v1h) = match data {
        InitialData::Zero => {
            let z = C64::new(0.0, 0.0);
            (z, z, z, z)
        }
        InitialData::GaussianFamily { u0, u1, v0, v1 } => (
            hat_gaussian(u0, k, l),
            hat_gaussian(u1, k, l),
            hat_gaussian(v0, k, l),
            hat_gaussian(v1, k, l),
        ),
        InitialData::Sampled(s) => (
            hat_sampled(s, &s.u0, k, l)?,
            hat_sampled(s, &s.u1, k, l)?,
            hat_sampled(s, &s.v0, k, l)?,
            hat_sampled(s, &s.v1, k, l)?,
        ),
    };
    Ok((
        k * u0h + l * v0h,
        k * u1h + l * v1h,
        l * u0h - k * v0h,
        l * u1h - k * v1h,
    ))
}

/// Surface (y = 0) spatial transforms of the initial data: `∫ e^{-ikx} f(x,0) dx`
/// for each of the four fields, plus the same transform of `∂_y u0` and `∂_y v0`.
///
/// These control the large-|l| behaviour of the half-plane transforms,
/// `û(k,l) = û_surf/(il) + û'_surf/(il)² + O(l^{-3})`.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceTraces {
    pub u0: C64,
    pub v0: C64,
    pub u1: C64,
    pub v1: C64,
    pub du0_dy: C64,
    pub dv0_dy: C64,
}

/// Boundary traces of the initial data at wavenumber `k`.
pub fn surface_traces(data: &InitialData, k: f64) -> Result<SurfaceTraces> {
    let z = C64::new(0.0, 0.0);
    match data {
        InitialData::Zero => {
            Ok(SurfaceTraces { u0: z, v0: z, u1: z, v1: z, du0_dy: z, dv0_dy: z })
        }
        InitialData::GaussianFamily { u0, u1, v0, v1 } => {
            let trace = |bumps: &[GaussianBump], deriv: bool| -> C64 {
                let mut s = z;
                for b in bumps {
                    let w = b.width;
                    let x_part = (2.0 * std::f64::consts::PI).sqrt()
                        * w
                        * (-k * k * w * w / 2.0).exp()
                        * (-I * k * b.x0).exp();
                    let y_part = (-b.y0 * b.y0 / (2.0 * w * w)).exp();
                    let d = if deriv { b.y0 / (w * w) } else { 1.0 };
                    s += b.amplitude * d * x_part * y_part;
                }
                s
            };
            Ok(SurfaceTraces {
                u0: trace(u0, false),
                v0: trace(v0, false),
                u1: trace(u1, false),
                v1: trace(v1, false),
                du0_dy: trace(u0, true),
                dv0_dy: trace(v0, true),
            })
        }
        InitialData::Sampled(s) => {
            if k.abs() * s.dx > std::f64::consts::PI {
                return Err(Error::GridTooCoarse(format!(
                    "sampled initial grid dx = {} cannot represent k = {k}",
                    s.dx
                )));
            }
            if s.ny < 3 {
                return Err(Error::GridTooCoarse(
                    "need at least 3 rows in y to form surface y-derivatives".into(),
                ));
            }
            let row = |field: &[f64], yi: usize| -> C64 {
                let mut acc = z;
                for xi in 0..s.nx {
                    let x = s.x0 + xi as f64 * s.dx;
                    acc += field[yi * s.nx + xi] * (-I * k * x).exp();
                }
                acc * s.dx
            };
            let d_dy = |field: &[f64]| -> C64 {
                (-3.0 * row(field, 0) + 4.0 * row(field, 1) - row(field, 2)) / (2.0 * s.dy)
            };
            Ok(SurfaceTraces {
                u0: row(&s.u0, 0),
                v0: row(&s.v0, 0),
                u1: row(&s.u1, 0),
                v1: row(&s.v1, 0),
                du0_dy: d_dy(&s.u0),
                dv0_dy: d_dy(&s.v0),
            })
        }
    }
}

/// The driving functions of the two global relations:
/// `N_P = -il(λ+2μ) F^(1) - iμk G^(1) + P0 cos(ω1 t) + P1 sin(ω1 t)/ω1`,
/// `N_Q =  ik(λ+2μ) F^(2) - iμl G^(2) + Q0 cos(ω2 t) + Q1 sin(ω2 t)/ω2`.
pub fn n_pq(
    forcing: &BoundaryForcing,
    data: &InitialData,
    mat: &Material,
    k: f64,
    l: C64,
    t: f64,
) -> Result<(C64, C64)> {
    let om1 = omega(1, mat, k, l)?;
    let om2 = omega(2, mat, k, l)?;
    let (g1, f1) = big_gf(forcing, mat, 1, k, l, t)?;
    let (g2, f2) = big_gf(forcing, mat, 2, k, l, t)?;
    let (p0, p1, q0, q1) = initial_transforms(data, k, l)?;
    let np = -I * l * mat.pmod() * f1 - I * mat.mu * k * g1
        + p0 * (om1 * t).cos()
        + p1 * sin_over(om1, t);
    let nq = I * k * mat.pmod() * f2 - I * mat.mu * l * g2
        + q0 * (om2 * t).cos()
        + q1 * sin_over(om2, t);
    Ok((np, nq))
}
