//! Branch-resolved evaluation of the multivalued spectral functions: the
//! square root `(k^2 + l^2)^{1/2}`, the dispersion frequencies, the sheet
//! maps between the two wave families, the elimination coefficients, the
//! 2x2 determinants, and localization of the determinant zeros.
//!
//! Branch conventions (fixed once, validated by ray continuation):
//! - `sqrt_branch(k, l)`: cut on the vertical segment [-i|k|, +i|k|],
//!   value ~ l as |l| -> infinity (hence odd in l across the cut).
//! - `l_map_21`: cut on the vertical segment between +-i k sqrt((λ+μ)/(λ+2μ)),
//!   value ~ -l sqrt((λ+2μ)/μ) at infinity.
//! - `l_map_12`: cut on the real segment between +-k sqrt((λ+μ)/μ),
//!   value ~ -l sqrt(μ/(λ+2μ)) at infinity.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::material::Material;

/// Relative threshold for the on-cut flag.
pub const EPS_CUT: f64 = 1e-8;
/// Relative threshold for refusing evaluation at a branch point.
pub const EPS_BRANCH_POINT: f64 = 1e-13;

/// A branch-resolved value together with a flag marking evaluation within
/// `EPS_CUT * max(1, |k|)` of the owning function's branch cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchValue {
    pub value: C64,
    pub on_cut: bool,
}

fn dist_to_vertical_segment(l: C64, half: f64) -> f64 {
    if l.im.abs() <= half {
        l.re.abs()
    } else {
        let d1 = (l - C64::new(0.0, half)).norm();
        let d2 = (l + C64::new(0.0, half)).norm();
        d1.min(d2)
    }
}

fn dist_to_horizontal_segment(l: C64, half: f64) -> f64 {
    if l.re.abs() <= half {
        l.im.abs()
    } else {
        let d1 = (l - C64::new(half, 0.0)).norm();
        let d2 = (l + C64::new(half, 0.0)).norm();
        d1.min(d2)
    }
}

/// `(k^2 + l^2)^{1/2}` on the branch cut along [-i|k|, +i|k|] with
/// `value ~ l` at infinity. Errors with `BranchPointHit` at `l = ±ik`.
pub fn sqrt_branch(k: f64, l: C64) -> Result<BranchValue> {
    let scale = k.abs().max(1.0);
    let bp = (l - C64::new(0.0, k.abs()))
        .norm()
        .min((l + C64::new(0.0, k.abs())).norm());
    if bp < EPS_BRANCH_POINT * scale {
        return Err(Error::BranchPointHit { dist: bp, threshold: EPS_BRANCH_POINT * scale });
    }
    let on_cut = dist_to_vertical_segment(l, k.abs()) < EPS_CUT * scale;
    let value = if l.norm() == 0.0 {
        // on the cut midpoint; value by continuity from the positive real axis
        C64::new(k.abs(), 0.0)
    } else {
        let r = k / l;
        l * (C64::new(1.0, 0.0) + r * r).sqrt()
    };
    Ok(BranchValue { value, on_cut })
}

/// Dispersion frequency `omega_j = c_j (k^2 + l^2)^{1/2}` on the fixed branch.
pub fn omega(j: u8, mat: &Material, k: f64, l: C64) -> Result<C64> {
    let c = match j {
        1 => mat.cp(),
        2 => mat.cs(),
        _ => panic!("omega: j must be 1 or 2"),
    };
    Ok(c * sqrt_branch(k, l)?.value)
}

/// The map sending the shear family into the pressure family:
/// `l21 = -l ((λ+2μ)/μ + ((λ+μ)/μ)(k/l)^2)^{1/2}`, branch fixed by
/// `l21 ~ -l sqrt((λ+2μ)/μ)` at infinity; satisfies `omega2(k, l21) = -omega1(k, l)`.
pub fn l_map_21(mat: &Material, k: f64, l: C64) -> Result<BranchValue> {
    if l.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let scale = k.abs().max(1.0);
    let half = k.abs() * ((mat.lambda + mat.mu) / mat.pmod()).sqrt();
    let bp = (l - C64::new(0.0, half)).norm().min((l + C64::new(0.0, half)).norm());
    if bp < EPS_BRANCH_POINT * scale {
        return Err(Error::BranchPointHit { dist: bp, threshold: EPS_BRANCH_POINT * scale });
    }
    let on_cut = dist_to_vertical_segment(l, half) < EPS_CUT * scale;
    let r = k / l;
    let inner = C64::new(mat.pmod() / mat.mu, 0.0)
        + (mat.lambda + mat.mu) / mat.mu * r * r;
    Ok(BranchValue { value: -l * inner.sqrt(), on_cut })
}

/// The opposite map: `l12 = -l (μ/(λ+2μ) - ((λ+μ)/(λ+2μ))(k/l)^2)^{1/2}`,
/// branch fixed by `l12 ~ -l sqrt(μ/(λ+2μ))` at infinity; satisfies
/// `omega1(k, l12) = -omega2(k, l)`.
pub fn l_map_12(mat: &Material, k: f64, l: C64) -> Result<BranchValue> {
    if l.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let scale = k.abs().max(1.0);
    let half = k.abs() * ((mat.lambda + mat.mu) / mat.mu).sqrt();
    let bp = (l - C64::new(half, 0.0)).norm().min((l + C64::new(half, 0.0)).norm());
    if bp < EPS_BRANCH_POINT * scale {
        return Err(Error::BranchPointHit { dist: bp, threshold: EPS_BRANCH_POINT * scale });
    }
    let on_cut = dist_to_horizontal_segment(l, half) < EPS_CUT * scale;
    let r = k / l;
    let inner = C64::new(mat.mu / mat.pmod(), 0.0)
        - (mat.lambda + mat.mu) / mat.pmod() * r * r;
    Ok(BranchValue { value: -l * inner.sqrt(), on_cut })
}

/// The eight elimination coefficients.
///
/// C couples the shear-family unknowns `(V^(2), U^(2))`; D couples the
/// pressure-family unknowns `(V^(1), U^(1))`.
#[derive(Debug, Clone, Copy)]
pub struct Coeffs {
    pub c1: C64,
    pub c2: C64,
    pub c3: C64,
    pub c4: C64,
    pub d1: C64,
    pub d2: C64,
    pub d3: C64,
    pub d4: C64,
}

/// All eight coefficients at `(k, l)`:
/// `C1 = C4 = -μ(k²-l²)`, `C2 = 2μ k l12`, `C3 = 2μ k l`,
/// `D1 = λk² + (λ+2μ) l²`, `D2 = -2μ k l`, `D3 = -2μ k l21`, `D4 = -μ(k²-l21²)`.
pub fn coeffs(mat: &Material, k: f64, l: C64) -> Result<Coeffs> {
    let mu = mat.mu;
    let l12 = l_map_12(mat, k, l)?.value;
    let l21 = l_map_21(mat, k, l)?.value;
    let k2 = C64::new(k * k, 0.0);
    Ok(Coeffs {
        c1: -mu * (k2 - l * l),
        c2: 2.0 * mu * k * l12,
        c3: 2.0 * mu * k * l,
        c4: -mu * (k2 - l * l),
        d1: mat.lambda * k2 + mat.pmod() * l * l,
        d2: -2.0 * mu * k * l,
        d3: -2.0 * mu * k * l21,
        d4: -mu * (k2 - l21 * l21),
    })
}

/// Determinant `Δ_j` in simplified form:
/// `Δ1 = μ²(k²-l²)² - 4μ²k² l l12`, `Δ2 = D1² - 4μ²k² l l21`.
pub fn delta(j: u8, mat: &Material, k: f64, l: C64) -> Result<C64> {
    if k == 0.0 {
        // degenerate column: Δ1 = μ² l⁴, Δ2 = (λ+2μ)² l⁴
        return Ok(match j {
            1 => mat.mu * mat.mu * l.powu(4),
            2 => mat.pmod() * mat.pmod() * l.powu(4),
            _ => panic!("delta: j must be 1 or 2"),
        });
    }
    let mu = mat.mu;
    let k2 = C64::new(k * k, 0.0);
    match j {
        1 => {
            let l12 = l_map_12(mat, k, l)?.value;
            let a = mu * (k2 - l * l);
            Ok(a * a - 4.0 * mu * mu * k * k * l * l12)
        }
        2 => {
            let l21 = l_map_21(mat, k, l)?.value;
            let d1 = mat.lambda * k2 + mat.pmod() * l * l;
            Ok(d1 * d1 - 4.0 * mu * mu * k * k * l * l21)
        }
        _ => panic!("delta: j must be 1 or 2"),
    }
}

/// `Δ_j` evaluated with the sheet map sign flipped (`l12 -> -l12` resp.
/// `l21 -> -l21`); together with [`delta`] this covers both sheets of the
/// two-valued composition.
pub fn delta_flipped(j: u8, mat: &Material, k: f64, l: C64) -> Result<C64> {
    if k == 0.0 {
        return delta(j, mat, k, l);
    }
    let mu = mat.mu;
    let k2 = C64::new(k * k, 0.0);
    match j {
        1 => {
            let l12 = l_map_12(mat, k, l)?.value;
            let a = mu * (k2 - l * l);
            Ok(a * a + 4.0 * mu * mu * k * k * l * l12)
        }
        2 => {
            let l21 = l_map_21(mat, k, l)?.value;
            let d1 = mat.lambda * k2 + mat.pmod() * l * l;
            Ok(d1 * d1 + 4.0 * mu * mu * k * k * l * l21)
        }
        _ => panic!("delta_flipped: j must be 1 or 2"),
    }
}

/// Which sheet(s) of the two-valued map a determinant zero lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    Principal,
    Flipped,
    Both,
}

/// The zeros of `Δ_j(k, l)` in ratio form `l = α k`, across both sheets of
/// the map composition, ordered by (Re α, Im α).
#[derive(Debug, Clone)]
pub struct ZeroSet {
    pub determinant_id: u8,
    pub ratios: Vec<C64>,
    pub sheets: Vec<Sheet>,
    pub max_abs_ratio: f64,
}

impl ZeroSet {
    /// Largest positive imaginary part among the ratios (0 if none) —
    /// the quantity that constrains admissible contours.
    pub fn max_positive_imag(&self) -> f64 {
        self.ratios.iter().map(|a| a.im).fold(0.0, f64::max)
    }
}

/// The sheet-product function `F_j(α) = Δ_j(1,α) · Δ_j^flipped(1,α)`.
///
/// The product is single-valued and analytic (the flip ambiguity squares
/// away), so argument-principle winding counts over rectangles are sound;
/// `Δ_j` alone is discontinuous across its cuts.
fn sheet_product(j: u8, mat: &Material, a: C64) -> C64 {
    let mu2 = mat.mu * mat.mu;
    // l12^2 and l21^2 are rational: l12^2 = μ/(λ+2μ) l² - (λ+μ)/(λ+2μ),
    // l21^2 = (λ+2μ)/μ l² + (λ+μ)/μ  (at k=1)
    match j {
        1 => {
            let t = mat.mu * (C64::new(1.0, 0.0) - a * a);
            let l12_sq = mat.mu / mat.pmod() * a * a
                - C64::new((mat.lambda + mat.mu) / mat.pmod(), 0.0);
            let a2 = t * t;
            a2 * a2 - 16.0 * mu2 * mu2 * a * a * l12_sq
        }
        2 => {
            let d1 = C64::new(mat.lambda, 0.0) + mat.pmod() * a * a;
            let l21_sq = mat.pmod() / mat.mu * a * a
                + C64::new((mat.lambda + mat.mu) / mat.mu, 0.0);
            let d2 = d1 * d1;
            d2 * d2 - 16.0 * mu2 * mu2 * a * a * l21_sq
        }
        _ => panic!("sheet_product: j must be 1 or 2"),
    }
}

/// Winding number of `f` around the rectangle `[x0,x1] x [y0,y1]`,
/// refining edge sampling until successive phase jumps stay below pi/2.
fn winding_number<F: Fn(C64) -> C64>(f: &F, x0: f64, x1: f64, y0: f64, y1: f64) -> i64 {
    let corners = [
        C64::new(x0, y0),
        C64::new(x1, y0),
        C64::new(x1, y1),
        C64::new(x0, y1),
        C64::new(x0, y0),
    ];
    let mut total = 0.0f64;
    for w in corners.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut n = 16usize;
        loop {
            let mut sum = 0.0;
            let mut ok = true;
            let mut prev = f(a);
            for i in 1..=n {
                let z = a + (b - a) * (i as f64 / n as f64);
                let cur = f(z);
                let d = (cur / prev).arg();
                if d.abs() > std::f64::consts::FRAC_PI_2 {
                    ok = false;
                    break;
                }
                sum += d;
                prev = cur;
            }
            if ok {
                total += sum;
                break;
            }
            n *= 2;
            if n > 1 << 16 {
                // edge passes essentially through a zero; treat as active
                total += std::f64::consts::PI; // force nonzero winding
                break;
            }
        }
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

fn newton_polish<F: Fn(C64) -> C64>(f: &F, start: C64, tol: f64) -> Option<C64> {
    let mut z = start;
    let h = 1e-7;
    for _ in 0..80 {
        let fz = f(z);
        if fz.norm() == 0.0 {
            return Some(z);
        }
        // central difference derivative; F is analytic so this is accurate
        let d = (f(z + C64::new(h, 0.0)) - f(z - C64::new(h, 0.0))) / (2.0 * h);
        if d.norm() == 0.0 {
            return None;
        }
        let step = fz / d;
        z -= step;
        if step.norm() < tol {
            return Some(z);
        }
    }
    None
}

/// Locate all zeros of `Δ_j(1, α)` (both sheets) inside the square
/// `|Re α|, |Im α| <= 4 cp/cs` by a rasterized argument-principle scan of
/// the single-valued sheet product, followed by Newton polishing.
pub fn delta_zeros(j: u8, mat: &Material) -> Result<ZeroSet> {
    let r_search = 4.0 * mat.cp() / mat.cs();
    let f = |a: C64| sheet_product(j, mat, a);
    let n0 = 24usize;
    let step = 2.0 * r_search / n0 as f64;
    let mut active: Vec<(f64, f64, f64, f64, i64)> = Vec::new();
    for i in 0..n0 {
        for jj in 0..n0 {
            let x0 = -r_search + i as f64 * step;
            let y0 = -r_search + jj as f64 * step;
            // offset cells an irrational hair so edges don't pass exactly
            // through axis-located zeros
            let off = 1e-4 * step;
            let (x0, x1, y0, y1) = (x0 + off, x0 + step + off, y0 + off, y0 + step + off);
            let w = winding_number(&f, x0, x1, y0, y1);
            if w != 0 {
                active.push((x0, x1, y0, y1, w));
            }
        }
    }
    // subdivide until cells are small, then polish from centers
    let mut roots: Vec<C64> = Vec::new();
    let mut stack = active;
    while let Some((x0, x1, y0, y1, w)) = stack.pop() {
        let (dx, dy) = (x1 - x0, y1 - y0);
        if dx < 2e-3 && dy < 2e-3 {
            let center = C64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
            match newton_polish(&f, center, 1e-13) {
                Some(r) => roots.push(r),
                None => {
                    return Err(Error::RootSearchIncomplete { re: center.re, im: center.im })
                }
            }
            continue;
        }
        let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let quads = [
            (x0, xm, y0, ym),
            (xm, x1, y0, ym),
            (x0, xm, ym, y1),
            (xm, x1, ym, y1),
        ];
        let mut found = 0;
        for &(a, b, c, d) in &quads {
            let wq = winding_number(&f, a, b, c, d);
            if wq != 0 {
                stack.push((a, b, c, d, wq));
                found += wq;
            }
        }
        // a zero landing exactly on an interior edge can evade all four
        // quadrants; fall back to polishing from the parent center
        if found == 0 && w != 0 {
            let center = C64::new(xm, ym);
            if let Some(r) = newton_polish(&f, center, 1e-13) {
                roots.push(r);
            }
        }
    }
    // dedup
    let mut unique: Vec<C64> = Vec::new();
    for r in roots {
        if !unique.iter().any(|u| (u - r).norm() < 1e-7) {
            unique.push(r);
        }
    }
    // classify sheets and verify
    let mut ratios = Vec::new();
    let mut sheets = Vec::new();
    for r in unique {
        let scale = sheet_scale(j, mat, r);
        let dp = delta(j, mat, 1.0, r)?.norm();
        let df = delta_flipped(j, mat, 1.0, r)?.norm();
        let tol = 1e-6 * scale;
        let sheet = match (dp < tol, df < tol) {
            (true, true) => Sheet::Both,
            (true, false) => Sheet::Principal,
            (false, true) => Sheet::Flipped,
            (false, false) => {
                return Err(Error::RootSearchIncomplete { re: r.re, im: r.im });
            }
        };
        ratios.push(r);
        sheets.push(sheet);
    }
    let mut idx: Vec<usize> = (0..ratios.len()).collect();
    idx.sort_by(|&a, &b| {
        ratios[a]
            .re
            .partial_cmp(&ratios[b].re)
            .unwrap()
            .then(ratios[a].im.partial_cmp(&ratios[b].im).unwrap())
    });
    let ratios: Vec<C64> = idx.iter().map(|&i| ratios[i]).collect();
    let sheets: Vec<Sheet> = idx.iter().map(|&i| sheets[i]).collect();
    let max_abs_ratio = ratios.iter().map(|a| a.norm()).fold(0.0, f64::max);
    Ok(ZeroSet { determinant_id: j, ratios, sheets, max_abs_ratio })
}

/// Magnitude scale of `Δ_j` near ratio `α`, for relative zero tests.
fn sheet_scale(j: u8, mat: &Material, a: C64) -> f64 {
    let mu2 = mat.mu * mat.mu;
    let s = (1.0 + a.norm()).powi(4);
    match j {
        1 => mu2 * s,
        2 => mat.pmod() * mat.pmod() * s,
        _ => unreachable!(),
    }
}

/// Startup validation of the fixed branch choices: continue each multivalued
/// function inward from the asymptotic region along rays and compare with the
/// direct composition. Returns an error naming the first disagreement.
pub fn validate_branches(mat: &Material) -> Result<()> {
    let k = 1.0;
    for ray in 0..16 {
        let theta = 0.05 + ray as f64 * (2.0 * std::f64::consts::PI / 16.0);
        let dir = C64::new(theta.cos(), theta.sin());
        // continuation state: previous values along the ray
        let mut prev_s: Option<C64> = None;
        let mut prev_12: Option<C64> = None;
        let mut prev_21: Option<C64> = None;
        let mut r = 1e6;
        while r > 0.3 {
            let l = r * dir;
            let (s, v12, v21) = (
                sqrt_branch(k, l)?.value,
                l_map_12(mat, k, l)?.value,
                l_map_21(mat, k, l)?.value,
            );
            let pick = |direct: C64, prev: Option<C64>| -> C64 {
                match prev {
                    None => direct,
                    Some(p) => {
                        if (direct - p).norm() <= (direct + p).norm() {
                            direct
                        } else {
                            -direct
                        }
                    }
                }
            };
            let cs = pick(s, prev_s);
            let c12 = pick(v12, prev_12);
            let c21 = pick(v21, prev_21);
            if (cs - s).norm() > 1e-10 * s.norm()
                || (c12 - v12).norm() > 1e-10 * v12.norm()
                || (c21 - v21).norm() > 1e-10 * v21.norm()
            {
                return Err(Error::InvalidParameter(format!(
                    "branch composition disagrees with ray continuation at l = {l} (ray {ray})"
                )));
            }
            prev_s = Some(cs);
            prev_12 = Some(c12);
            prev_21 = Some(c21);
            r *= 0.93;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn mat() -> Material {
        Material::new(2.0, 1.0).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_c_close(got: C64, want: C64, tol: f64) {
        assert!(
            (got - want).norm() <= tol * want.norm().max(1.0),
            "got {got}, want {want}"
        );
    }

    #[test]
    fn sqrt_branch_asymptotic() {
        let v = sqrt_branch(1.0, c(1e6, 0.0)).unwrap().value;
        assert!((v / c(1e6, 0.0) - 1.0).norm() < 1e-11);
    }

    #[test]
    fn sqrt_branch_at_origin_along_real_axis() {
        let v = sqrt_branch(1.0, c(0.0, 0.0)).unwrap();
        assert_relative_eq!(v.value.re, 1.0);
        assert!(v.on_cut, "l=0 lies on the cut");
    }

    #[test]
    fn sqrt_branch_frozen_value() {
        // reference from a 32-digit evaluation of the composition
        let v = sqrt_branch(2.0, c(1.0, 1.0)).unwrap().value;
        assert_c_close(v, c(2.0581710272714922503, 0.48586827175664567818), 1e-14);
    }

    #[test]
    fn sqrt_branch_refuses_branch_points() {
        assert!(matches!(
            sqrt_branch(1.0, c(0.0, 1.0)),
            Err(Error::BranchPointHit { .. })
        ));
    }

    #[test]
    fn omega_on_real_axis() {
        let m = mat();
        assert_c_close(omega(2, &m, 1.0, c(0.0, 0.0)).unwrap(), c(1.0, 0.0), 1e-14);
        assert_c_close(omega(1, &m, 1.0, c(0.0, 0.0)).unwrap(), c(2.0, 0.0), 1e-14);
    }

    #[test]
    fn l_maps_asymptotics_and_frozen_values() {
        let m = mat();
        let v21 = l_map_21(&m, 1.0, c(1e6, 0.0)).unwrap().value;
        assert!((v21 / c(-2e6, 0.0) - 1.0).norm() < 1e-6);
        let v12 = l_map_12(&m, 1.0, c(1e6, 0.0)).unwrap().value;
        assert!((v12 / c(-5e5, 0.0) - 1.0).norm() < 1e-6);
        // frozen: l21(1, 2i) = -3.6055512754639893 i, l12(1, 2i) = -1.3228756555322953 i
        assert_c_close(
            l_map_21(&m, 1.0, c(0.0, 2.0)).unwrap().value,
            c(0.0, -3.6055512754639892931),
            1e-14,
        );
        assert_c_close(
            l_map_12(&m, 1.0, c(0.0, 2.0)).unwrap().value,
            c(0.0, -1.3228756555322952953),
            1e-14,
        );
    }

    #[test]
    fn map_identities_at_named_point() {
        // omega2(k, l21(l)) = -omega1(k, l) at l = 2i
        let m = mat();
        let l = c(0.0, 2.0);
        let l21 = l_map_21(&m, 1.0, l).unwrap().value;
        let lhs = omega(2, &m, 1.0, l21).unwrap();
        let rhs = -omega(1, &m, 1.0, l).unwrap();
        assert_c_close(lhs, rhs, 1e-12);
    }

    #[test]
    fn coeffs_frozen_tuple() {
        // frozen 32-digit recomputation at (λ=2, μ=1, k=1, l=1+1i)
        let m = mat();
        let cf = coeffs(&m, 1.0, c(1.0, 1.0)).unwrap();
        assert_c_close(cf.c1, c(-1.0, 2.0), 1e-14);
        assert_c_close(cf.c2, c(-0.55025052270033751106, -1.8173540210239706201), 1e-13);
        assert_c_close(cf.c3, c(2.0, 2.0), 1e-14);
        assert_c_close(cf.c4, c(-1.0, 2.0), 1e-14);
        assert_c_close(cf.d1, c(2.0, 8.0), 1e-14);
        assert_c_close(cf.d2, c(-2.0, -2.0), 1e-14);
        assert_c_close(cf.d3, c(4.804998178005384253, 3.3298659868882204515), 1e-13);
        assert_c_close(cf.d4, c(2.0, 8.0), 1e-14);
    }

    #[test]
    fn coeffs_vanish_at_k_zero() {
        let m = mat();
        let cf = coeffs(&m, 0.0, c(0.7, -0.3)).unwrap();
        assert_eq!(cf.c2, c(0.0, 0.0));
        assert_eq!(cf.c3, c(0.0, 0.0));
        assert_eq!(cf.d2, c(0.0, 0.0));
        assert_eq!(cf.d3, c(0.0, 0.0));
    }

    #[test]
    fn delta_frozen_values() {
        let m = mat();
        assert_c_close(
            delta(1, &m, 1.0, c(1.0, 1.0)).unwrap(),
            c(-5.534206996647266218, 0.73520908744861626226),
            1e-13,
        );
        assert_c_close(
            delta(2, &m, 1.0, c(1.0, 1.0)).unwrap(),
            c(-57.049735617765672397, 48.269728329787209409),
            1e-13,
        );
    }

    #[test]
    fn delta2_vanishes_at_ik() {
        let m = mat();
        let v = delta(2, &m, 1.0, c(0.0, 1.0) * 0.9999999999).unwrap();
        // scale of Δ2 near there is ~(λ+2μ)² = 16
        assert!(v.norm() < 1e-8 * 16.0);
    }

    #[test]
    fn delta_equals_coefficient_determinant() {
        let m = mat();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let k: f64 = rng.gen_range(0.2..3.0);
            let l = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if l.norm() < 0.1 {
                continue;
            }
            let cf = match coeffs(&m, k, l) {
                Ok(cf) => cf,
                Err(_) => continue,
            };
            let d1 = delta(1, &m, k, l).unwrap();
            let d2 = delta(2, &m, k, l).unwrap();
            let det_c = cf.c1 * cf.c4 - cf.c2 * cf.c3;
            let det_d = cf.d1 * cf.d4 - cf.d2 * cf.d3;
            assert!((d1 - det_c).norm() <= 1e-12 * det_c.norm().max(1.0));
            assert!((d2 - det_d).norm() <= 1e-12 * det_d.norm().max(1.0));
        }
    }

    #[test]
    fn branch_validation_passes() {
        validate_branches(&mat()).unwrap();
        validate_branches(&Material::new(1.0, 1.0).unwrap()).unwrap();
        validate_branches(&Material::new(5.0, 0.5).unwrap()).unwrap();
    }

    #[test]
    fn delta1_zeros_match_quartic_certificate() {
        // Exact certificate: eliminating the radical from Δ1 = 0 shows
        // w = α² must satisfy a quartic; for λ=2, μ=1 it is
        // 4w⁴ - 16w³ + 8w² + 32w + 4 = 0
        let zs = delta_zeros(1, &mat()).unwrap();
        assert_eq!(zs.ratios.len(), 8, "eight zeros expected, got {:?}", zs.ratios);
        for a in &zs.ratios {
            let w = a * a;
            let p = 4.0 * w.powu(4) - 16.0 * w.powu(3) + 8.0 * w * w + 32.0 * w + 4.0;
            assert!(p.norm() < 1e-8, "quartic residual {} at α = {}", p.norm(), a);
        }
        // frozen root values
        let expected = [
            c(0.0, 0.361103080528647378),
            c(0.0, 1.0),
            c(1.63317024091523766, 0.319448459735676311),
        ];
        for e in expected {
            assert!(
                zs.ratios.iter().any(|r| (r - e).norm() < 1e-9),
                "missing zero {e}"
            );
        }
        // closed under negation
        for r in &zs.ratios {
            assert!(zs.ratios.iter().any(|s| (s + r).norm() < 1e-9));
        }
    }

    #[test]
    fn delta2_zeros_match_quartic_certificate() {
        // for λ=2, μ=1: 256w⁴ + 512w³ + 320w² + 80w + 16 = 0
        let zs = delta_zeros(2, &mat()).unwrap();
        assert_eq!(zs.ratios.len(), 8, "eight zeros expected, got {:?}", zs.ratios);
        for a in &zs.ratios {
            let w = a * a;
            let p = 256.0 * w.powu(4) + 512.0 * w.powu(3) + 320.0 * w * w + 80.0 * w + 16.0;
            assert!(p.norm() < 1e-7, "quartic residual {} at α = {}", p.norm(), a);
        }
        let expected = [
            c(0.0, 1.0),
            c(0.0, 0.884646177119315708),
            c(0.294871402511102751, 0.442323088559657854),
        ];
        for e in expected {
            assert!(
                zs.ratios.iter().any(|r| (r - e).norm() < 1e-8),
                "missing zero {e}"
            );
        }
        // ±i is forced analytically for every material
        let m2 = Material::new(1.3, 0.7).unwrap();
        let zs2 = delta_zeros(2, &m2).unwrap();
        assert!(zs2.ratios.iter().any(|r| (r - c(0.0, 1.0)).norm() < 1e-8));
        assert!(zs2.ratios.iter().any(|r| (r - c(0.0, -1.0)).norm() < 1e-8));
    }

    #[test]
    fn zero_sets_reproducible() {
        let a = delta_zeros(1, &mat()).unwrap();
        let b = delta_zeros(1, &mat()).unwrap();
        assert_eq!(a.ratios.len(), b.ratios.len());
        for (x, y) in a.ratios.iter().zip(&b.ratios) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn omega_odd_in_l(re in -5.0f64..5.0, im in -5.0f64..5.0, k in 0.3f64..3.0) {
            let l = c(re, im);
            // keep well away from the cut, where the identity is undefined
            prop_assume!(dist_to_vertical_segment(l, k.abs()) > 0.05);
            let m = mat();
            for j in [1u8, 2] {
                let a = omega(j, &m, k, l).unwrap();
                let b = omega(j, &m, k, -l).unwrap();
                prop_assert!((a + b).norm() <= 1e-10 * a.norm().max(1e-30));
            }
        }

        #[test]
        fn map_identities_random(re in -4.0f64..4.0, im in -4.0f64..4.0, k in 0.3f64..2.5) {
            let l = c(re, im);
            prop_assume!(l.norm() > 0.15);
            let m = mat();
            // stay away from every cut involved
            prop_assume!(dist_to_vertical_segment(l, k) > 0.05);
            prop_assume!(dist_to_horizontal_segment(l, k * (3.0f64).sqrt()) > 0.05);
            prop_assume!(dist_to_vertical_segment(l, k * (3.0f64 / 4.0).sqrt()) > 0.05);
            let l21 = l_map_21(&m, k, l).unwrap().value;
            let l12 = l_map_12(&m, k, l).unwrap().value;
            let om1 = omega(1, &m, k, l).unwrap();
            let om2 = omega(2, &m, k, l).unwrap();
            let lhs21 = omega(2, &m, k, l21).unwrap();
            prop_assert!((lhs21 + om1).norm() <= 1e-10 * om1.norm());
            let lhs12 = omega(1, &m, k, l12).unwrap();
            prop_assert!((lhs12 + om2).norm() <= 1e-10 * om2.norm());
            // round trip: l12(k, l21(k,l)) = l
            let rt = l_map_12(&m, k, l21).unwrap().value;
            prop_assert!((rt - l).norm() <= 1e-10 * l.norm());
            // algebraic: k² + l21² = ((λ+2μ)/μ)(k² + l²)
            let lhs = C64::new(k * k, 0.0) + l21 * l21;
            let rhs = m.pmod() / m.mu * (C64::new(k * k, 0.0) + l * l);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        }

        #[test]
        fn delta_homogeneity(re in -2.0f64..2.0, im in -2.0f64..2.0,
                             k in prop::sample::select(vec![-2.0f64, -0.7, 0.5, 1.7, 3.0])) {
            let a = c(re, im);
            prop_assume!(a.norm() > 0.15);
            let m = mat();
            let l = a * k;
            prop_assume!(dist_to_horizontal_segment(l, k.abs() * (3.0f64).sqrt()) > 0.05);
            prop_assume!(dist_to_vertical_segment(l, k.abs() * (0.75f64).sqrt()) > 0.05);
            for j in [1u8, 2] {
                let big = delta(j, &m, k, l).unwrap();
                let unit = delta(j, &m, 1.0, a).unwrap();
                let scaled = k.powi(4) * unit;
                prop_assert!((big - scaled).norm() <= 1e-10 * scaled.norm().max(1e-12));
            }
        }
    }

    #[test]
    fn asymptotic_normalization_sweep() {
        let m = mat();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let k: f64 = rng.gen_range(0.2..3.0);
            let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let l = 1e4 * k.abs().max(1.0) * c(ang.cos(), ang.sin());
            let s = sqrt_branch(k, l).unwrap().value;
            assert!((s / l - 1.0).norm() < 1e-6);
            let v21 = l_map_21(&m, k, l).unwrap().value;
            assert!((v21 / (-2.0 * l) - 1.0).norm() < 1e-6);
            let v12 = l_map_12(&m, k, l).unwrap().value;
            assert!((v12 / (-0.5 * l) - 1.0).norm() < 1e-6);
        }
    }
}
