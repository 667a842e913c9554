//! The boundary Volterra system at fixed wavenumber.
//!
//! Applying the lower-half-plane contour functional
//! `K[f] = (1/2π) ∫_γ f(l) dl / (l (k²+l²)^{1/2})`
//! to the global relations produces a system of Volterra integral equations
//! for the surface displacement transforms `h̃ = (ũ, ṽ)(k, t)`:
//! `h̃(t) = ∫_0^t K[N(·, t-s)] g̃(s) ds + ∫_0^t K[M(·, t-s)] h̃(s) ds + K[H(·, t)]`.
//! This module provides the contour quadrature, the kernel entries, and a
//! trapezoid convolution march, all cross-checked against the closed-form
//! Laplace solution.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use super::BoundaryTrace;
use crate::error::{Error, Result};
use crate::material::Material;
use crate::quad::gauss_legendre;
use crate::special::si;
use crate::spectral::sqrt_branch;
use crate::transforms::{
    g_tilde, initial_transforms, surface_traces, BoundaryForcing, InitialData,
};

const I: C64 = C64::new(0.0, 1.0);

type Gl = (Vec<f64>, Vec<f64>);

/// Gauss-Legendre panels along the straight segment a -> b.
fn seg_nodes(gl: &Gl, a: C64, b: C64, panels: usize, nodes: &mut Vec<C64>, weights: &mut Vec<C64>) {
    let d = b - a;
    let pf = panels as f64;
    for i in 0..panels {
        let mid = (i as f64 + 0.5) / pf;
        let half = 0.5 / pf;
        for (&x, &w) in gl.0.iter().zip(gl.1.iter()) {
            nodes.push(a + (mid + half * x) * d);
            weights.push(half * w * d);
        }
    }
}

/// Geometrically spaced panels between real abscissae of equal sign.
fn geom_nodes(gl: &Gl, a: f64, b: f64, per_decade: usize, nodes: &mut Vec<C64>, weights: &mut Vec<C64>) {
    let decades = (b.abs() / a.abs()).log10().abs();
    let n = ((decades * per_decade as f64).ceil() as usize).max(3);
    let sign = a.signum();
    let (la, lb) = (a.abs().log10(), b.abs().log10());
    for i in 0..n {
        let e0 = sign * 10f64.powf(la + (lb - la) * i as f64 / n as f64);
        let e1 = sign * 10f64.powf(la + (lb - la) * (i + 1) as f64 / n as f64);
        seg_nodes(gl, C64::new(e0, 0.0), C64::new(e1, 0.0), 1, nodes, weights);
    }
}

/// Quadrature model of the contour `γ_{k2}`: real-axis tails joined by a
/// rectangular detour through the lower half l-plane, passing below the
/// spectral branch cut `[-i|k|, i|k|]`.
#[derive(Debug, Clone)]
pub struct GammaK2 {
    /// Wavenumber the contour belongs to.
    pub k: f64,
    /// Rectangle depth below the real axis; must exceed `|k|`.
    pub depth: f64,
    /// Rectangle half-width; the real-axis tails attach at `±half_width`.
    pub half_width: f64,
    l_max: f64,
    nodes: Vec<C64>,
    weights: Vec<C64>,
}

impl GammaK2 {
    /// Standard contour: depth `2|k|`, half-width `4|k|`, tails to `2000|k|`.
    pub fn standard(k: f64) -> Result<Self> {
        Self::with_resolution(k, 2.0 * k.abs(), 4.0 * k.abs(), 2000.0, 8.0, 8)
    }

    /// Standard resolution with a custom rectangle.
    pub fn with_shape(k: f64, depth: f64, half_width: f64) -> Result<Self> {
        Self::with_resolution(k, depth, half_width, 2000.0, 8.0, 8)
    }

    /// Full control of shape and quadrature resolution: tails reach
    /// `l_mult·|k|` with `per_decade` geometric panels per decade, and the
    /// rectangle carries `per_unit` panels per unit length.
    pub fn with_resolution(
        k: f64,
        depth: f64,
        half_width: f64,
        l_mult: f64,
        per_unit: f64,
        per_decade: usize,
    ) -> Result<Self> {
        if k == 0.0 {
            return Err(Error::ZeroArgument);
        }
        let ak = k.abs();
        if !(depth > ak) {
            // the path would cross the branch cut ending at -i|k|
            return Err(Error::CertificateViolation { re: 0.0, im: -ak });
        }
        let l_max = l_mult * ak;
        if !(half_width > 0.0) || !(half_width < l_max) {
            return Err(Error::InvalidParameter(format!(
                "contour half-width {half_width} must lie in (0, {l_max})"
            )));
        }
        let gl = gauss_legendre(12);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        geom_nodes(&gl, -l_max, -half_width, per_decade, &mut nodes, &mut weights);
        let corners = [
            C64::new(-half_width, 0.0),
            C64::new(-half_width, -depth),
            C64::new(half_width, -depth),
            C64::new(half_width, 0.0),
        ];
        for pair in corners.windows(2) {
            let len = (pair[1] - pair[0]).norm();
            let panels = ((len * per_unit).ceil() as usize).max(4);
            seg_nodes(&gl, pair[0], pair[1], panels, &mut nodes, &mut weights);
        }
        geom_nodes(&gl, half_width, l_max, per_decade, &mut nodes, &mut weights);
        Ok(Self { k, depth, half_width, l_max, nodes, weights })
    }
}

/// Apply `K[f] = (1/2π) ∫_γ f(l) dl / (l (k²+l²)^{1/2})` over the contour.
///
/// The principal-value tails converge only when the integrand decays; an `f`
/// growing like the inverse kernel (e.g. `f = l (k²+l²)^{1/2}`) leaves a
/// non-decaying tail, which is detected by comparing the outermost decade's
/// contribution against the previous one and reported as `ToleranceNotMet`.
pub fn k_apply<F: FnMut(C64) -> Result<C64>>(gamma: &GammaK2, mut f: F) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    let mut outer = 0.0;
    let mut inner = 0.0;
    let l_mid = gamma.l_max / 10.0;
    let l_lo = gamma.l_max / 100.0;
    for (&l, &w) in gamma.nodes.iter().zip(gamma.weights.iter()) {
        let s = sqrt_branch(gamma.k, l)?.value;
        let c = w * f(l)? / (l * s) / (2.0 * PI);
        total += c;
        let al = l.norm();
        if al >= l_mid {
            outer += c.norm();
        } else if al >= l_lo {
            inner += c.norm();
        }
    }
    if outer > 0.8 * inner && outer > 1e-13 * total.norm().max(1e-280) {
        return Err(Error::ToleranceNotMet { estimate: outer, requested: 0.8 * inner });
    }
    Ok(total)
}

/// Kernel matrices N, M and inhomogeneous vector H of the Volterra system at
/// `(k, l, t)`. Row 1 carries the shear-family exponential `e^{i ω2 t}`,
/// row 2 the pressure-family `e^{i ω1 t}`; H collects the initial data.
#[derive(Debug, Clone, Copy)]
pub struct Kernels {
    pub n: [[C64; 2]; 2],
    pub m: [[C64; 2]; 2],
    pub h: [C64; 2],
}

/// Evaluate the kernel entries:
/// `N = [[i√μ l, -i((λ+2μ)/√μ) k], [i(μ/√(λ+2μ)) k, i√(λ+2μ) l]] e^{iω_j t}`,
/// `M = [[√μ k², 2√μ k l], [-(2μ/√(λ+2μ)) k l, -(λ/√(λ+2μ)) k²]] e^{iω_j t}`,
/// `H = (-(i/√μ) e^{iω2 t} (iω2 Q0 + Q1), -(i/√(λ+2μ)) e^{iω1 t} (iω1 P0 + P1))`.
pub fn kernels(mat: &Material, data: &InitialData, k: f64, l: C64, t: f64) -> Result<Kernels> {
    let (cp, cs) = (mat.cp(), mat.cs());
    let (mu, la, pm) = (mat.mu, mat.lambda, mat.pmod());
    let s = sqrt_branch(k, l)?.value;
    let (om1, om2) = (cp * s, cs * s);
    let (e1, e2) = ((I * om1 * t).exp(), (I * om2 * t).exp());
    let n = [
        [I * cs * l * e2, -I * (pm / cs) * k * e2],
        [I * (mu / cp) * k * e1, I * cp * l * e1],
    ];
    let m = [
        [cs * k * k * e2, 2.0 * cs * k * l * e2],
        [-2.0 * (mu / cp) * k * l * e1, -(la / cp) * k * k * e1],
    ];
    let (p0, p1, q0, q1) = initial_transforms(data, k, l)?;
    let h = [
        -(I / cs) * e2 * (I * om2 * q0 + q1),
        -(I / cp) * e1 * (I * om1 * p0 + p1),
    ];
    Ok(Kernels { n, m, h })
}

/// Time-domain K-transform of one kernel entry `A(l) e^{i ω_j(l) t}`,
/// precomputed for repeated evaluation in t.
///
/// The rectangle contributes directly; the real-axis tails are folded into
/// sin/cos combinations of the odd/even parts of A; the truncated remainder
/// beyond `L` is restored in closed form from the large-|l| behaviour
/// `A(l) ≈ alpha·l + beta` via sine-integral identities.
pub struct KTimeKernel {
    c_j: f64,
    rect: Vec<(C64, C64)>,      // (kernel-weighted amplitude, ω_j)
    tail: Vec<(C64, C64, f64)>, // (odd amplitude, even amplitude, ω_j)
    alpha: C64,
    beta: C64,
    s_l: f64,
}

impl KTimeKernel {
    /// Value of `K[A e^{iω_j t}]` at time `t >= 0`.
    pub fn eval(&self, t: f64) -> C64 {
        let mut v = C64::new(0.0, 0.0);
        for &(amp, om) in &self.rect {
            v += amp * (I * om * t).exp();
        }
        for &(o, e, om) in &self.tail {
            let (sn, cn) = (om * t).sin_cos();
            v += o * sn + e * cn;
        }
        let x = self.c_j * t * self.s_l;
        let rem = PI / 2.0 - si(x);
        v += I * self.alpha * rem / PI;
        v += self.beta * (x.cos() / self.s_l - self.c_j * t * rem) / PI;
        v
    }
}

/// Shared quadrature geometry for building [`KTimeKernel`]s at one `(k, t_max)`.
pub struct KTimeEngine {
    k: f64,
    cp: f64,
    cs: f64,
    rect_n: Vec<C64>,
    rect_kw: Vec<C64>,
    rect_s: Vec<C64>,
    tail_n: Vec<f64>,
    tail_kw: Vec<f64>,
    tail_s: Vec<f64>,
    s_l: f64,
}

impl KTimeEngine {
    /// Build the node sets: the standard rectangle plus folded real tails to
    /// `300|k|`, with tail panels sized to resolve oscillations up to `t_max`.
    pub fn new(mat: &Material, k: f64, t_max: f64) -> Result<Self> {
        if k == 0.0 {
            return Err(Error::ZeroArgument);
        }
        if !(t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
        }
        let ak = k.abs();
        let gl = gauss_legendre(12);
        let mut rect_n = Vec::new();
        let mut rect_w = Vec::new();
        let corners = [
            C64::new(-4.0 * ak, 0.0),
            C64::new(-4.0 * ak, -2.0 * ak),
            C64::new(4.0 * ak, -2.0 * ak),
            C64::new(4.0 * ak, 0.0),
        ];
        for pair in corners.windows(2) {
            let len = (pair[1] - pair[0]).norm();
            let panels = ((len * 10.0).ceil() as usize).max(4);
            seg_nodes(&gl, pair[0], pair[1], panels, &mut rect_n, &mut rect_w);
        }
        let mut rect_s = Vec::with_capacity(rect_n.len());
        let mut rect_kw = Vec::with_capacity(rect_n.len());
        for (&l, &w) in rect_n.iter().zip(rect_w.iter()) {
            let s = sqrt_branch(k, l)?.value;
            rect_s.push(s);
            rect_kw.push(w / (l * s) / (2.0 * PI));
        }

        let l_tail = 300.0 * ak;
        let c_max = mat.cp().max(mat.cs());
        let panel = (2.0 * PI / (c_max * t_max) / 4.0).max(0.25);
        let panels = (((l_tail - 4.0 * ak) / panel).ceil() as usize).max(4);
        let mut tn = Vec::new();
        let mut tw = Vec::new();
        seg_nodes(&gl, C64::new(4.0 * ak, 0.0), C64::new(l_tail, 0.0), panels, &mut tn, &mut tw);
        let tail_n: Vec<f64> = tn.iter().map(|z| z.re).collect();
        let tail_s: Vec<f64> = tail_n.iter().map(|&l| (l * l + k * k).sqrt()).collect();
        let tail_kw: Vec<f64> = tail_n
            .iter()
            .zip(tail_s.iter())
            .zip(tw.iter())
            .map(|((&l, &s), w)| w.re / (l * s) / (2.0 * PI))
            .collect();
        Ok(Self {
            k,
            cp: mat.cp(),
            cs: mat.cs(),
            rect_n,
            rect_kw,
            rect_s,
            tail_n,
            tail_kw,
            tail_s,
            s_l: (l_tail * l_tail + k * k).sqrt(),
        })
    }

    /// Build the K-transform of `A(l) e^{i ω_j(l) t}` given the tail
    /// behaviour `A(l) ≈ alpha·l + beta` for large real `|l|`.
    pub fn kernel<F: FnMut(C64) -> Result<C64>>(
        &self,
        j: u8,
        mut a_fn: F,
        alpha: C64,
        beta: C64,
    ) -> Result<KTimeKernel> {
        let c_j = match j {
            1 => self.cp,
            2 => self.cs,
            _ => panic!("kernel family j must be 1 or 2"),
        };
        let mut rect = Vec::with_capacity(self.rect_n.len());
        for ((&l, &kw), &s) in self.rect_n.iter().zip(&self.rect_kw).zip(&self.rect_s) {
            rect.push((kw * a_fn(l)?, c_j * s));
        }
        let mut tail = Vec::with_capacity(self.tail_n.len());
        for ((&l, &kw), &s) in self.tail_n.iter().zip(&self.tail_kw).zip(&self.tail_s) {
            let ap = a_fn(C64::new(l, 0.0))?;
            let am = a_fn(C64::new(-l, 0.0))?;
            tail.push((I * (ap - am) * kw, (ap + am) * kw, c_j * s));
        }
        Ok(KTimeKernel { c_j, rect, tail, alpha, beta, s_l: self.s_l })
    }

    fn k(&self) -> f64 {
        self.k
    }
}

/// The K-transformed kernel tables the march needs: `K[N]`, `K[M]` and
/// (for nonzero initial data) `K[H]` as functions of time.
pub struct KTimeTable {
    kn: [[KTimeKernel; 2]; 2],
    km: [[KTimeKernel; 2]; 2],
    kh: Option<[KTimeKernel; 2]>,
}

impl KTimeTable {
    pub fn new(mat: &Material, data: &InitialData, k: f64, t_max: f64) -> Result<Self> {
        let eng = KTimeEngine::new(mat, k, t_max)?;
        Self::from_engine(mat, data, &eng)
    }

    /// Build the tables on an existing engine (`engine.k` is the wavenumber).
    pub fn from_engine(mat: &Material, data: &InitialData, eng: &KTimeEngine) -> Result<Self> {
        let k = eng.k();
        let (cp, cs) = (mat.cp(), mat.cs());
        let (mu, la, pm) = (mat.mu, mat.lambda, mat.pmod());
        let zero = C64::new(0.0, 0.0);
        let n12 = -I * (pm / cs) * k;
        let n21 = I * (mu / cp) * k;
        let m11 = C64::new(cs * k * k, 0.0);
        let m22 = C64::new(-(la / cp) * k * k, 0.0);
        let kn = [
            [
                eng.kernel(2, |l| Ok(I * cs * l), I * cs, zero)?,
                eng.kernel(2, |_| Ok(n12), zero, n12)?,
            ],
            [
                eng.kernel(1, |_| Ok(n21), zero, n21)?,
                eng.kernel(1, |l| Ok(I * cp * l), I * cp, zero)?,
            ],
        ];
        let km = [
            [
                eng.kernel(2, |_| Ok(m11), zero, m11)?,
                eng.kernel(2, |l| Ok(2.0 * cs * k * l), C64::new(2.0 * cs * k, 0.0), zero)?,
            ],
            [
                eng.kernel(1, |l| Ok(-2.0 * (mu / cp) * k * l), C64::new(-2.0 * (mu / cp) * k, 0.0), zero)?,
                eng.kernel(1, |_| Ok(m22), zero, m22)?,
            ],
        ];
        let kh = if matches!(data, InitialData::Zero) {
            None
        } else {
            let st = surface_traces(data, k)?;
            let a1 = |l: C64| -> Result<C64> {
                let s = sqrt_branch(k, l)?.value;
                let (_, _, q0, q1) = initial_transforms(data, k, l)?;
                Ok(-(I / cs) * (I * cs * s * q0 + q1))
            };
            let a2 = |l: C64| -> Result<C64> {
                let s = sqrt_branch(k, l)?.value;
                let (p0, p1, _, _) = initial_transforms(data, k, l)?;
                Ok(-(I / cp) * (I * cp * s * p0 + p1))
            };
            // A1 ≈ -i û0_surf · l + (-∂y û0_surf + i k v̂0_surf - û1_surf/√μ)
            // A2 ≈ -i v̂0_surf · l + (-∂y v̂0_surf - i k û0_surf - v̂1_surf/√(λ+2μ))
            let alpha1 = -I * st.u0;
            let beta1 = -st.du0_dy + I * k * st.v0 - st.u1 / cs;
            let alpha2 = -I * st.v0;
            let beta2 = -st.dv0_dy - I * k * st.u0 - st.v1 / cp;
            Some([eng.kernel(2, a1, alpha1, beta1)?, eng.kernel(1, a2, alpha2, beta2)?])
        };
        Ok(Self { kn, km, kh })
    }

    pub fn n_at(&self, t: f64) -> [[C64; 2]; 2] {
        [
            [self.kn[0][0].eval(t), self.kn[0][1].eval(t)],
            [self.kn[1][0].eval(t), self.kn[1][1].eval(t)],
        ]
    }

    pub fn m_at(&self, t: f64) -> [[C64; 2]; 2] {
        [
            [self.km[0][0].eval(t), self.km[0][1].eval(t)],
            [self.km[1][0].eval(t), self.km[1][1].eval(t)],
        ]
    }

    pub fn h_at(&self, t: f64) -> [C64; 2] {
        match &self.kh {
            None => [C64::new(0.0, 0.0); 2],
            Some([h1, h2]) => [h1.eval(t), h2.eval(t)],
        }
    }
}

fn matvec(m: &[[C64; 2]; 2], v: &[C64; 2]) -> [C64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// March the boundary Volterra system on the uniform grid
/// `t_i = i·t_max/n_steps` with trapezoid convolution quadrature, returning
/// the surface displacement transforms.
///
/// At `t = 0` the trace equals `K[H](0)`, the surface transform of the
/// initial displacements. Sampled initial data must resolve the contour
/// tails (`|l| ≤ 300|k|` against its y-Nyquist limit) or the kernel build
/// reports `GridTooCoarse`.
pub fn solve_volterra(
    mat: &Material,
    forcing: &BoundaryForcing,
    data: &InitialData,
    k: f64,
    t_max: f64,
    n_steps: usize,
) -> Result<BoundaryTrace> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be positive".into()));
    }
    let table = KTimeTable::new(mat, data, k, t_max)?;
    let nt = n_steps + 1;
    let dt = t_max / n_steps as f64;
    let times: Vec<f64> = (0..nt).map(|i| i as f64 * dt).collect();
    let kns: Vec<[[C64; 2]; 2]> = times.iter().map(|&t| table.n_at(t)).collect();
    let kms: Vec<[[C64; 2]; 2]> = times.iter().map(|&t| table.m_at(t)).collect();
    let khs: Vec<[C64; 2]> = times.iter().map(|&t| table.h_at(t)).collect();
    let gs: Vec<[C64; 2]> = times
        .iter()
        .map(|&t| Ok([g_tilde(forcing, mat, 1, k, t)?, g_tilde(forcing, mat, 2, k, t)?]))
        .collect::<Result<_>>()?;

    let mut h = vec![[C64::new(0.0, 0.0); 2]; nt];
    h[0] = khs[0];
    for n in 1..nt {
        let mut rhs = khs[n];
        for m in 0..=n {
            let w = if m == 0 || m == n { 0.5 * dt } else { dt };
            let term = matvec(&kns[n - m], &gs[m]);
            rhs[0] += w * term[0];
            rhs[1] += w * term[1];
        }
        for m in 0..n {
            let w = if m == 0 { 0.5 * dt } else { dt };
            let term = matvec(&kms[n - m], &h[m]);
            rhs[0] += w * term[0];
            rhs[1] += w * term[1];
        }
        // implicit step: (I - (dt/2) K[M](0)) h_n = rhs
        let a = &kms[0];
        let wd = 0.5 * dt;
        let m00 = 1.0 - wd * a[0][0];
        let m01 = -wd * a[0][1];
        let m10 = -wd * a[1][0];
        let m11 = 1.0 - wd * a[1][1];
        let det = m00 * m11 - m01 * m10;
        if det.norm() < 1e-12 {
            return Err(Error::StepUnstable { t: times[n] });
        }
        h[n] = [(m11 * rhs[0] - m01 * rhs[1]) / det, (m00 * rhs[1] - m10 * rhs[0]) / det];
    }
    Ok(BoundaryTrace {
        k,
        t: times,
        u: h.iter().map(|x| x[0]).collect(),
        v: h.iter().map(|x| x[1]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::{laplace_solution, laplace_trace};
    use crate::transforms::{GaussianBump, TimeProfile};

    fn mat() -> Material {
        Material::new(2.0, 1.0).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn gaussian_data() -> InitialData {
        let bump = |amplitude, x0, y0, width| GaussianBump { amplitude, x0, y0, width };
        InitialData::GaussianFamily {
            u0: vec![bump(1.0, 0.3, 0.8, 0.5)],
            v0: vec![bump(-0.7, -0.2, 0.5, 0.4)],
            u1: vec![bump(0.4, 0.0, 1.0, 0.6)],
            v1: vec![bump(0.9, 0.1, 0.7, 0.5)],
        }
    }

    fn heaviside_normal(sigma0: f64) -> BoundaryForcing {
        BoundaryForcing::NormalLineLoad {
            sigma0,
            profile: TimeProfile::Heaviside,
            mollify_eps: 0.0,
        }
    }

    fn rel_l2(a: &[C64], b: &[C64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn kernels_frozen_values() {
        // 20-digit references at λ=2, μ=1, k=1, l=-2i, t=0.5 (where
        // e^{iω1 t} = e^{√3} and e^{iω2 t} = e^{√3/2})
        let ks = kernels(&mat(), &gaussian_data(), 1.0, c(0.0, -2.0), 0.5).unwrap();
        let tol = 1e-12;
        let checks = [
            (ks.n[0][0], c(4.7548853504723295765, 0.0)),
            (ks.n[0][1], c(0.0, -9.509770700944659153)),
            (ks.n[1][0], c(0.0, 2.8261168370170460584)),
            (ks.n[1][1], c(22.608934696136368467, 0.0)),
            (ks.m[0][0], c(2.3774426752361647882, 0.0)),
            (ks.m[0][1], c(0.0, -9.509770700944659153)),
            (ks.m[1][0], c(0.0, 11.304467348068184234)),
            (ks.m[1][1], c(-5.6522336740340921169, 0.0)),
        ];
        for (i, (got, want)) in checks.iter().enumerate() {
            assert!((got - want).norm() < tol * want.norm(), "entry {i}: {got} vs {want}");
        }
        // H references integrate the half-plane y-transforms independently
        let h1 = c(-3.0535693056376283737, 0.70675890269013894365);
        let h2 = c(1.4157497456076543832, -2.4856618349364502696);
        assert!((ks.h[0] - h1).norm() < 1e-10 * h1.norm(), "H1 = {}", ks.h[0]);
        assert!((ks.h[1] - h2).norm() < 1e-10 * h2.norm(), "H2 = {}", ks.h[1]);
    }

    #[test]
    fn kernels_zero_data_has_zero_h() {
        let ks = kernels(&mat(), &InitialData::Zero, 1.3, c(0.4, -1.1), 0.7).unwrap();
        assert_eq!(ks.h, [c(0.0, 0.0); 2]);
    }

    #[test]
    fn kernels_vanish_at_k_zero() {
        // every entry of M carries a factor k or k²; N loses its off-diagonal
        let ks = kernels(&mat(), &InitialData::Zero, 0.0, c(0.0, -2.0), 0.4).unwrap();
        for row in &ks.m {
            for entry in row {
                assert_eq!(*entry, c(0.0, 0.0));
            }
        }
        assert_eq!(ks.n[0][1], c(0.0, 0.0));
        assert_eq!(ks.n[1][0], c(0.0, 0.0));
        assert!(ks.n[0][0].norm() > 0.0 && ks.n[1][1].norm() > 0.0);
    }

    #[test]
    fn gamma_k2_validation() {
        assert!(matches!(GammaK2::standard(0.0), Err(Error::ZeroArgument)));
        assert!(matches!(
            GammaK2::with_shape(1.0, 0.5, 4.0),
            Err(Error::CertificateViolation { .. })
        ));
        assert!(GammaK2::with_shape(1.0, 1.5, 4.0).is_ok());
    }

    #[test]
    fn k_apply_zero_is_zero() {
        let g = GammaK2::standard(1.0).unwrap();
        let v = k_apply(&g, |_| Ok(c(0.0, 0.0))).unwrap();
        assert_eq!(v, c(0.0, 0.0));
    }

    #[test]
    fn k_apply_annihilates_lower_analytic_decay() {
        // f analytic and decaying in the closed lower half-plane: the path
        // closes downward around no singularity, so K[f] = 0.
        let g = GammaK2::standard(1.0).unwrap();
        let v = k_apply(&g, |l| Ok(1.0 / ((l - c(0.0, 1.5)) * (l - c(0.0, 1.5))))).unwrap();
        assert!(v.norm() < 1e-8, "K[f] = {v}");
    }

    #[test]
    fn k_apply_deformation_invariance() {
        // a Laplace-domain resolvent entry: its only singularities are the
        // spectral cut above the path and a pole at -i√(k²+p²/μ) below both
        // rectangles, so K[f] is contour-shape independent and nonzero
        let k = 1.0;
        let m = mat();
        let cs = m.cs();
        let p = c(5.0, 0.0);
        let f = |l: C64| -> Result<C64> {
            let s = sqrt_branch(k, l)?.value;
            Ok(1.0 / (p - I * cs * s))
        };
        let base = k_apply(&GammaK2::standard(k).unwrap(), f).unwrap();
        let deformed = k_apply(&GammaK2::with_shape(k, 3.0, 6.0).unwrap(), f).unwrap();
        assert!(base.norm() > 1e-4, "test integral degenerate: {base}");
        assert!(
            (base - deformed).norm() < 1e-7 * base.norm(),
            "base {base} vs deformed {deformed}"
        );
    }

    #[test]
    fn k_apply_flags_non_decaying_integrand() {
        let g = GammaK2::standard(1.0).unwrap();
        let r = k_apply(&g, |l| Ok(l * sqrt_branch(1.0, l)?.value));
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })), "got {r:?}");
    }

    #[test]
    fn h_tail_coefficients_match_numeric_sampling() {
        // α, β from surface traces vs direct evaluation of the H amplitudes
        // at large ±l*
        let m = mat();
        let data = gaussian_data();
        let k = 0.8;
        let (cp, cs) = (m.cp(), m.cs());
        let st = surface_traces(&data, k).unwrap();
        let lstar = 1e5;
        let a_fn = |l: C64, row: u8| -> C64 {
            let s = sqrt_branch(k, l).unwrap().value;
            let (p0, p1, q0, q1) = initial_transforms(&data, k, l).unwrap();
            match row {
                1 => -(I / cs) * (I * cs * s * q0 + q1),
                _ => -(I / cp) * (I * cp * s * p0 + p1),
            }
        };
        for row in [1u8, 2u8] {
            let ap = a_fn(c(lstar, 0.0), row);
            let am = a_fn(c(-lstar, 0.0), row);
            let alpha_num = (ap - am) / (2.0 * lstar);
            let beta_num = 0.5 * (ap + am);
            let (alpha, beta) = if row == 1 {
                (-I * st.u0, -st.du0_dy + I * k * st.v0 - st.u1 / cs)
            } else {
                (-I * st.v0, -st.dv0_dy - I * k * st.u0 - st.v1 / cp)
            };
            assert!(
                (alpha_num - alpha).norm() < 1e-7 * alpha.norm().max(1e-3),
                "row {row}: α {alpha_num} vs {alpha}"
            );
            assert!(
                (beta_num - beta).norm() < 1e-4 * beta.norm().max(1e-2),
                "row {row}: β {beta_num} vs {beta}"
            );
        }
    }

    #[test]
    fn initial_surface_transform_at_time_zero() {
        // K[H](0) must reproduce the surface transforms of the initial
        // displacements — the t=0 invariant of the boundary trace.
        let m = mat();
        let data = gaussian_data();
        for &k in &[0.6, 1.0] {
            let table = KTimeTable::new(&m, &data, k, 1.0).unwrap();
            let h0 = table.h_at(0.0);
            let st = surface_traces(&data, k).unwrap();
            assert!(
                (h0[0] - st.u0).norm() < 2e-4 * st.u0.norm(),
                "k={k}: {} vs {}",
                h0[0],
                st.u0
            );
            assert!(
                (h0[1] - st.v0).norm() < 2e-4 * st.v0.norm(),
                "k={k}: {} vs {}",
                h0[1],
                st.v0
            );
        }
    }

    #[test]
    fn laplace_domain_operator_identity() {
        // (I - K[M°])⁻¹ K[H°] must equal the closed-form transformed traces;
        // valid for Re p > 2 c_p |k| so the p-poles stay clear of the path.
        let m = mat();
        let data = gaussian_data();
        let (cp, cs) = (m.cp(), m.cs());
        let (mu, la) = (m.mu, m.lambda);
        for &(k, pre, pim) in &[(1.0f64, 5.0f64, 0.0f64), (0.5, 3.0, 0.5)] {
            let p = c(pre, pim);
            let g = GammaK2::with_resolution(k, 2.0 * k.abs(), 4.0 * k.abs(), 8000.0, 16.0, 16)
                .unwrap();
            let om = |j: u8, l: C64| -> Result<C64> {
                let s = sqrt_branch(k, l)?.value;
                Ok(if j == 1 { cp * s } else { cs * s })
            };
            let km = [
                [
                    k_apply(&g, |l| Ok(cs * k * k / (p - I * om(2, l)?))).unwrap(),
                    k_apply(&g, |l| Ok(2.0 * cs * k * l / (p - I * om(2, l)?))).unwrap(),
                ],
                [
                    k_apply(&g, |l| Ok(-2.0 * (mu / cp) * k * l / (p - I * om(1, l)?))).unwrap(),
                    k_apply(&g, |l| Ok(-(la / cp) * k * k / (p - I * om(1, l)?))).unwrap(),
                ],
            ];
            let kh = [
                k_apply(&g, |l| {
                    let (_, _, q0, q1) = initial_transforms(&data, k, l)?;
                    Ok(-(I / cs) * (I * om(2, l)? * q0 + q1) / (p - I * om(2, l)?))
                })
                .unwrap(),
                k_apply(&g, |l| {
                    let (p0, p1, _, _) = initial_transforms(&data, k, l)?;
                    Ok(-(I / cp) * (I * om(1, l)? * p0 + p1) / (p - I * om(1, l)?))
                })
                .unwrap(),
            ];
            // solve (I - KM) h = KH
            let m00 = 1.0 - km[0][0];
            let m01 = -km[0][1];
            let m10 = -km[1][0];
            let m11 = 1.0 - km[1][1];
            let det = m00 * m11 - m01 * m10;
            let h = [(m11 * kh[0] - m01 * kh[1]) / det, (m00 * kh[1] - m10 * kh[0]) / det];
            let (uo, vo) =
                laplace_solution(&m, &BoundaryForcing::None, &data, k, p).unwrap();
            let scale = uo.norm().max(vo.norm());
            assert!(
                (h[0] - uo).norm().max((h[1] - vo).norm()) < 5e-4 * scale,
                "k={k}, p={p}: ({}, {}) vs ({uo}, {vo})",
                h[0],
                h[1]
            );
        }
    }

    #[test]
    fn march_zero_inputs_stay_zero() {
        let trace = solve_volterra(
            &mat(),
            &BoundaryForcing::None,
            &InitialData::Zero,
            1.0,
            1.0,
            20,
        )
        .unwrap();
        assert!(trace.u.iter().chain(&trace.v).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn march_self_convergence_is_second_order() {
        // halving dt must shrink the dt-dependent error by ~4 (trapezoid)
        let m = mat();
        let f = heaviside_normal(1.0);
        let run = |n: usize| solve_volterra(&m, &f, &InitialData::Zero, 1.0, 1.5, n).unwrap();
        let (t40, t80, t160) = (run(40), run(80), run(160));
        let diff = |a: &BoundaryTrace, b: &BoundaryTrace, step: usize| -> f64 {
            a.u.iter()
                .zip(a.v.iter())
                .enumerate()
                .map(|(i, (u, v))| {
                    ((u - b.u[i * step]).norm_sqr() + (v - b.v[i * step]).norm_sqr()).sqrt()
                })
                .fold(0.0, f64::max)
        };
        let e1 = diff(&t40, &t80, 2);
        let e2 = diff(&t80, &t160, 2);
        assert!(e2 < 0.35 * e1, "errors {e1} -> {e2} not contracting at second order");
        assert!(e1 > 0.0);
    }

    #[test]
    fn march_matches_laplace_inversion_for_load() {
        // two independent routes to the same traces: time march vs de Hoog
        // inversion of the closed-form solution
        let m = mat();
        let f = heaviside_normal(1.0);
        let march = solve_volterra(&m, &f, &InitialData::Zero, 1.0, 2.0, 200).unwrap();
        let ts = &march.t[1..];
        let lap = laplace_trace(&m, &f, &InitialData::Zero, 1.0, ts, None).unwrap();
        let ru = rel_l2(&march.u[1..], &lap.u);
        let rv = rel_l2(&march.v[1..], &lap.v);
        assert!(ru < 0.02, "u mismatch {ru}");
        assert!(rv < 0.02, "v mismatch {rv}");
    }

    #[test]
    fn march_matches_laplace_inversion_with_initial_data() {
        // nonzero initial data: exercises the H-vector end to end
        let m = mat();
        let data = gaussian_data();
        let march =
            solve_volterra(&m, &BoundaryForcing::None, &data, 1.0, 2.0, 200).unwrap();
        let ts = &march.t[1..];
        let lap = laplace_trace(&m, &BoundaryForcing::None, &data, 1.0, ts, None).unwrap();
        let ru = rel_l2(&march.u[1..], &lap.u);
        let rv = rel_l2(&march.v[1..], &lap.v);
        assert!(ru < 0.02, "u mismatch {ru}");
        assert!(rv < 0.02, "v mismatch {rv}");
        // and the t=0 invariant
        let st = surface_traces(&data, 1.0).unwrap();
        assert!((march.u[0] - st.u0).norm() < 2e-4 * st.u0.norm());
        assert!((march.v[0] - st.v0).norm() < 2e-4 * st.v0.norm());
    }
}
