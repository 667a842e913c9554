//! Admissible deformed contours in the complex l-plane and panel-adaptive
//! quadrature along contours and the real axis.
//!
//! The deformed path γ_k is a trapezoid: flat top above every determinant
//! zero, branch point, and pole of the integrand, with 45° descent legs
//! down to the real axis and real-axis tails out to the truncation radius.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::material::Material;
use crate::quad::gauss_legendre;
use crate::spectral::ZeroSet;

/// Straight segment from `a` to `b` in the complex l-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: C64,
    pub b: C64,
}

/// A piecewise-straight integration path with its verified exclusion set.
#[derive(Debug, Clone)]
pub struct ContourPath {
    /// Ordered left to right; consecutive segments share endpoints.
    pub segments: Vec<Segment>,
    /// Margin (in units of |k|) kept between the path and every
    /// certificate point.
    pub clearance: f64,
    /// Points the path must clear from above: determinant zeros scaled by
    /// k, the branch points ±ik, ±k√((λ+μ)/μ), ±ik√((λ+μ)/(λ+2μ)), and the
    /// poles ±ik of 1/(k²+l²).
    pub exclusion_certificate: Vec<C64>,
}

impl ContourPath {
    /// Height of the path above the real axis at abscissa `x`
    /// (the top profile is single-valued in x by construction).
    pub fn height_at(&self, x: f64) -> f64 {
        let mut h = 0.0f64;
        for s in &self.segments {
            let (x0, x1) = (s.a.re.min(s.b.re), s.a.re.max(s.b.re));
            if x >= x0 - 1e-14 && x <= x1 + 1e-14 {
                let t = if (s.b.re - s.a.re).abs() < 1e-300 {
                    0.5
                } else {
                    (x - s.a.re) / (s.b.re - s.a.re)
                };
                h = h.max(s.a.im + t * (s.b.im - s.a.im));
            }
        }
        h
    }

    /// Verify that every certificate point keeps `clearance·|k|` of vertical
    /// room below the path (points with Im ≤ 0 trivially satisfy this on the
    /// upper path; they must still not sit on the real-axis tails).
    pub fn verify_certificate(&self, k: f64) -> Result<()> {
        let margin = self.clearance * k.abs();
        for &z in &self.exclusion_certificate {
            let h = self.height_at(z.re);
            if z.im >= 0.0 && z.im + margin > h + 1e-12 {
                return Err(Error::CertificateViolation { re: z.re, im: z.im });
            }
            // real-axis tails must keep horizontal distance from real
            // certificate points (the l12 branch points)
            if z.im.abs() < 1e-14 {
                let x_tail = self
                    .segments
                    .iter()
                    .filter(|s| s.a.im.abs() < 1e-14 && s.b.im.abs() < 1e-14)
                    .map(|s| s.a.re.abs().min(s.b.re.abs()))
                    .fold(f64::INFINITY, f64::min);
                if x_tail.is_finite() && z.re.abs() + margin > x_tail {
                    return Err(Error::CertificateViolation { re: z.re, im: z.im });
                }
            }
        }
        Ok(())
    }

    /// Total arc length.
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| (s.b - s.a).norm()).sum()
    }
}

/// Build the deformed contour γ_k for wavenumber `k ≠ 0`: flat top at
/// height `(h_cert + clearance)·|k|` over `|Re l| ≤ W·|k|` with 45° legs
/// and real-axis tails reaching `±l_max`.
///
/// `W = 2·max|Re α| + 4` over the certificate ratios, so the legs stay far
/// to the side of every excluded point and every cut.
pub fn build_gamma_k(
    mat: &Material,
    zeros: (&ZeroSet, &ZeroSet),
    k: f64,
    clearance: f64,
    l_max: f64,
) -> Result<ContourPath> {
    if k == 0.0 {
        return Err(Error::ZeroArgument);
    }
    if clearance <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "clearance must be positive, got {clearance}"
        )));
    }
    let ak = k.abs();
    // certificate ratios: determinant zeros plus branch points and poles
    let mut ratios: Vec<C64> = Vec::new();
    ratios.extend_from_slice(&zeros.0.ratios);
    ratios.extend_from_slice(&zeros.1.ratios);
    let b21 = ((mat.lambda + mat.mu) / mat.pmod()).sqrt();
    let b12 = ((mat.lambda + mat.mu) / mat.mu).sqrt();
    ratios.push(C64::new(0.0, 1.0)); // ±ik: sqrt_branch points and 1/(k²+l²) poles
    ratios.push(C64::new(0.0, -1.0));
    ratios.push(C64::new(0.0, b21));
    ratios.push(C64::new(0.0, -b21));
    ratios.push(C64::new(b12, 0.0));
    ratios.push(C64::new(-b12, 0.0));

    let h_cert = ratios.iter().map(|r| r.im).fold(0.0, f64::max);
    let max_re = ratios.iter().map(|r| r.re.abs()).fold(0.0, f64::max);
    let h_top = (h_cert + clearance) * ak;
    let w = (2.0 * max_re + 4.0) * ak;
    if w + h_top >= l_max {
        return Err(Error::InvalidParameter(format!(
            "truncation l_max = {l_max} too small for contour width {} at k = {k}",
            w + h_top
        )));
    }
    let certificate: Vec<C64> = ratios.iter().map(|r| r * ak).collect();
    let path = ContourPath {
        segments: vec![
            Segment { a: C64::new(-l_max, 0.0), b: C64::new(-w - h_top, 0.0) },
            Segment { a: C64::new(-w - h_top, 0.0), b: C64::new(-w, h_top) },
            Segment { a: C64::new(-w, h_top), b: C64::new(w, h_top) },
            Segment { a: C64::new(w, h_top), b: C64::new(w + h_top, 0.0) },
            Segment { a: C64::new(w + h_top, 0.0), b: C64::new(l_max, 0.0) },
        ],
        clearance,
        exclusion_certificate: certificate,
    };
    path.verify_certificate(k)?;
    Ok(path)
}

/// Result of a panel-adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: C64,
    /// Panel-doubling error estimate; compare against the requested
    /// tolerance to decide whether the result should be flagged.
    pub error_estimate: f64,
    pub panels_used: usize,
    /// Bound on the neglected tails, from the caller's decay model.
    pub truncation_bound: f64,
}

/// Decay model of the integrand beyond the truncation radius, used to
/// report a truncation bound alongside the quadrature value.
#[derive(Debug, Clone, Copy)]
pub enum Decay {
    /// |f| ≤ amp·e^{−rate·|l|} for |l| ≥ L.
    Exponential { amp: f64, rate: f64 },
    /// |f| ≤ amp·|l|^{−p} for |l| ≥ L, with an oscillation of spatial
    /// frequency `osc` sharpening the bound by one power when present.
    Power { amp: f64, p: f64, osc: f64 },
}

impl Decay {
    /// Bound on `|∫_{|l|>L} f dl|` (both tails).
    pub fn tail_bound(&self, l_trunc: f64) -> f64 {
        match *self {
            Decay::Exponential { amp, rate } => {
                if rate <= 0.0 {
                    f64::INFINITY
                } else {
                    2.0 * amp * (-rate * l_trunc).exp() / rate
                }
            }
            Decay::Power { amp, p, osc } => {
                if osc > 0.0 {
                    // van der Corput-style gain of 1/osc and one power of L
                    2.0 * amp / (osc * l_trunc.powf(p))
                } else if p > 1.0 {
                    2.0 * amp * l_trunc.powf(1.0 - p) / (p - 1.0)
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

fn integrate_segment<F: FnMut(C64) -> C64>(
    f: &mut F,
    a: C64,
    b: C64,
    tol: f64,
    osc_rate: f64,
) -> (C64, f64, usize) {
    let (xg, wg) = gauss_legendre(12);
    let len = (b - a).norm();
    if len == 0.0 {
        return (C64::new(0.0, 0.0), 0.0, 0);
    }
    let per_panel = 2.0 * std::f64::consts::PI / osc_rate.max(1e-12) / 1.5;
    let mut n = ((len / per_panel).ceil() as usize).clamp(1, 1 << 20);
    let eval = |f: &mut F, n: usize| -> C64 {
        let dz = (b - a) / n as f64;
        let mut sum = C64::new(0.0, 0.0);
        for p in 0..n {
            let za = a + dz * p as f64;
            for i in 0..12 {
                let z = za + dz * (0.5 + 0.5 * xg[i]);
                sum += wg[i] * f(z);
            }
        }
        sum * dz * 0.5
    };
    let mut v1 = eval(f, n);
    let mut panels = n;
    loop {
        let n2 = n * 2;
        let v2 = eval(f, n2);
        panels += n2;
        let err = (v2 - v1).norm();
        if err <= tol || n2 >= 1 << 14 {
            return (v2, err, panels);
        }
        n = n2;
        v1 = v2;
    }
}

/// Integrate `f` along `path` by oscillation-aware panels with doubling
/// refinement per segment. `osc_rate` is the caller's bound on the phase
/// rate (radians per unit arc length). The result's `error_estimate`
/// exceeding `tol` signals that the tolerance was not met.
pub fn integrate_path<F: FnMut(C64) -> C64>(
    mut f: F,
    path: &ContourPath,
    tol: f64,
    osc_rate: f64,
) -> QuadratureResult {
    let total_len = path.length();
    let mut value = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut panels = 0;
    for s in &path.segments {
        let share = tol * (s.b - s.a).norm() / total_len;
        let (v, e, p) = integrate_segment(&mut f, s.a, s.b, share, osc_rate);
        value += v;
        err += e;
        panels += p;
    }
    QuadratureResult { value, error_estimate: err, panels_used: panels, truncation_bound: 0.0 }
}

/// Integrate `f` over the real segment `[-L, L]` with the same panel
/// scheme, reporting the tail bound from `decay`.
pub fn integrate_real_line<F: FnMut(C64) -> C64>(
    mut f: F,
    l_trunc: f64,
    tol: f64,
    osc_rate: f64,
    decay: Decay,
) -> QuadratureResult {
    let (v, e, p) = integrate_segment(
        &mut f,
        C64::new(-l_trunc, 0.0),
        C64::new(l_trunc, 0.0),
        tol,
        osc_rate,
    );
    QuadratureResult {
        value: v,
        error_estimate: e,
        panels_used: p,
        truncation_bound: decay.tail_bound(l_trunc),
    }
}
