//! The interpolating catenoid family spanning two horizontal circles.
//!
//! For neck-circle radius `r` and half-height `h`, the member with parameter
//! `s ≥ 0` is the surface of revolution with profile
//! `ρ(z) = r·cosh(sz)/cosh(sh)`, `|z| ≤ h`. `s = 0` is the cylinder and
//! `s = ∞` the pair of flat discs. Members with `rs = cosh(sh)` are minimal.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use crate::geom::{TriMesh, Vec3, VertexTag};
use crate::{Error, Result};

/// The family `C_s^{r,h}` with its balance roots, when they exist.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CatenoidFamily {
    pub r: f64,
    pub h: f64,
    pub roots: Option<(f64, f64)>,
}

impl CatenoidFamily {
    pub fn new(r: f64, h: f64) -> Result<Self> {
        if !(r > 0.0 && h > 0.0 && r.is_finite() && h.is_finite()) {
            return Err(Error::Domain(format!(
                "need r, h > 0, got r = {r}, h = {h}"
            )));
        }
        let roots = solve_balance(r, h).ok();
        Ok(Self { r, h, roots })
    }

    /// `0 < 2h < r·tanh(1)`, the regime where the unstable member is the
    /// area maximiser.
    pub fn in_maximality_regime(&self) -> bool {
        2.0 * self.h < self.r * libm::tanh(1.0)
    }

    pub fn profile(&self, s: f64, z: f64) -> Result<f64> {
        profile(self.r, self.h, s, z)
    }

    pub fn area(&self, s: f64) -> f64 {
        area(self.r, self.h, s)
    }

    fn require_roots(&self) -> Result<(f64, f64)> {
        self.roots.ok_or(Error::NoRoots {
            r: self.r,
            h: self.h,
        })
    }
}

/// `ρ(z) = r·cosh(sz)/cosh(sh)`; `r` at `s = 0`, `0` off the rims at `s = ∞`.
pub fn profile(r: f64, h: f64, s: f64, z: f64) -> Result<f64> {
    if z.abs() > h {
        return Err(Error::Domain(format!("|z| = {} exceeds h = {h}", z.abs())));
    }
    if s < 0.0 || s.is_nan() {
        return Err(Error::Domain(format!("s = {s} must be >= 0")));
    }
    if s == 0.0 || z.abs() == h {
        return Ok(r);
    }
    if s.is_infinite() {
        return Ok(0.0);
    }
    // cosh(sz)/cosh(sh) = e^{s(|z|-h)}·(1 + e^{-2s|z|})/(1 + e^{-2sh}), no overflow.
    let a = z.abs();
    Ok(r * libm::exp(s * (a - h)) * (1.0 + libm::exp(-2.0 * s * a))
        / (1.0 + libm::exp(-2.0 * s * h)))
}

/// Sign of `rs − cosh(sh)`, which is the sign of the mean curvature.
pub fn curvature_sign(r: f64, h: f64, s: f64) -> Ordering {
    balance(r, h, s)
        .partial_cmp(&0.0)
        .unwrap_or(Ordering::Equal)
}

/// `rs − cosh(sh)`.
pub fn balance(r: f64, h: f64, s: f64) -> f64 {
    r * s - libm::cosh(s * h)
}

/// Positive root `t₀ ≈ 1.19968` of `cosh t = t·sinh t` (equivalently
/// `t·tanh t = 1`), by bisection to machine precision.
pub fn tangency_root() -> f64 {
    bisect(|t| t * libm::tanh(t) - 1.0, 1.0, 2.0)
}

/// `1/sinh(t₀)`: the balance equation has two roots iff `h/r` is below it.
pub fn tangency_ratio() -> f64 {
    1.0 / libm::sinh(tangency_root())
}

/// Bisection on a sign change until the bracket stops shrinking.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The two positive roots `s₁ < s₂` of the balance equation `rs = cosh(sh)`.
///
/// Works in `u = sh`, where the equation reads `(r/h)·u = cosh u`; the
/// roots straddle the tangency point `t₀`.
pub fn solve_balance(r: f64, h: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && h > 0.0) {
        return Err(Error::Domain(format!(
            "need r, h > 0, got r = {r}, h = {h}"
        )));
    }
    let k = r / h;
    let t0 = tangency_root();
    let g = |u: f64| k * u - libm::cosh(u);
    if !(g(t0) > 0.0) {
        return Err(Error::NoRoots { r, h });
    }
    let u1 = bisect(g, 0.0, t0);
    let mut hi = (2.0 * t0).max(2.0 * libm::log(2.0 * k) + 2.0);
    while g(hi) >= 0.0 {
        hi *= 2.0;
    }
    let u2 = bisect(g, t0, hi);
    Ok((u1 / h, u2 / h))
}

/// Area `A(s)` of the family member, with the limits `A(0) = 4πrh` and
/// `A(∞) = 2πr²`.
pub fn area(r: f64, h: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 4.0 * PI * r * h;
    }
    if s.is_infinite() {
        return 2.0 * PI * r * r;
    }
    let t = libm::tanh(s * h);
    let x = r * s * t;
    // (2π/s²)(asinh X + X√(1+X²)) with the second term rearranged so
    // large s does not overflow.
    2.0 * PI * (libm::asinh(x) / (s * s) + r * t * libm::sqrt(1.0 / (s * s) + r * r * t * t))
}

/// Outcome of the maximality checks for the unstable member.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaximalityReport {
    pub r: f64,
    pub h: f64,
    pub s1: f64,
    pub s2: f64,
    pub area_s1: f64,
    pub area_s2: f64,
    pub area_cylinder: f64,
    pub grid_points: usize,
    /// Grid points with `A(s) > A(s₂)`.
    pub grid_violations: usize,
    /// Adjacent grid pairs whose area difference disagrees in sign with
    /// the curvature sign at their midpoint.
    pub sign_mismatches: usize,
    pub local_min_at_s1: bool,
    pub local_max_at_s2: bool,
    pub s2h_above_one: bool,
    pub above_tanh_bound: bool,
    pub above_cylinder: bool,
}

impl MaximalityReport {
    pub fn passed(&self) -> bool {
        self.grid_violations == 0
            && self.sign_mismatches == 0
            && self.local_min_at_s1
            && self.local_max_at_s2
            && self.s2h_above_one
            && self.above_tanh_bound
            && self.above_cylinder
    }
}

/// Uniform grid of `n` points on `[0, k·s₂]`.
pub fn default_s_grid(fam: &CatenoidFamily, k: f64, n: usize) -> Result<Vec<f64>> {
    let (_, s2) = fam.require_roots()?;
    Ok((0..n).map(|i| k * s2 * i as f64 / (n - 1) as f64).collect())
}

/// Check that the minimal member `s₂` maximises area over the family.
pub fn verify_unstable_max(fam: &CatenoidFamily, s_grid: &[f64]) -> Result<MaximalityReport> {
    if !fam.in_maximality_regime() {
        return Err(Error::Precondition(format!(
            "need 2h < r·tanh(1), got r = {}, h = {}",
            fam.r, fam.h
        )));
    }
    let (s1, s2) = fam.require_roots()?;
    let (r, h) = (fam.r, fam.h);
    let a2 = area(r, h, s2);
    let slack = 4.0 * f64::EPSILON * a2;
    let grid_violations = s_grid
        .iter()
        .filter(|&&s| area(r, h, s) > a2 + slack)
        .count();
    let mut sign_mismatches = 0;
    for w in s_grid.windows(2) {
        let (sa, sb) = (w[0], w[1]);
        if (sa..=sb).contains(&s1) || (sa..=sb).contains(&s2) {
            continue;
        }
        let d = area(r, h, sb) - area(r, h, sa);
        if d.abs() <= slack {
            continue;
        }
        let want = curvature_sign(r, h, 0.5 * (sa + sb));
        let got = d.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        if want != got {
            sign_mismatches += 1;
        }
    }
    let probe = |s: f64| {
        let d = 1e-4 * s;
        (area(r, h, s - d), area(r, h, s), area(r, h, s + d))
    };
    let (l1, m1, r1) = probe(s1);
    let (l2, m2, r2) = probe(s2);
    Ok(MaximalityReport {
        r,
        h,
        s1,
        s2,
        area_s1: area(r, h, s1),
        area_s2: a2,
        area_cylinder: area(r, h, 0.0),
        grid_points: s_grid.len(),
        grid_violations,
        sign_mismatches,
        local_min_at_s1: l1 > m1 && r1 > m1,
        local_max_at_s2: l2 < m2 && r2 < m2,
        s2h_above_one: s2 * h > 1.0,
        above_tanh_bound: a2 > 2.0 * PI * r * r * libm::tanh(1.0),
        above_cylinder: a2 > 4.0 * PI * r * h,
    })
}

/// Result of the catenoid estimate `A(s₂) ≤ 2πr² + 4πh²/(−log h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateCheck {
    pub holds: bool,
    /// `RHS − A(s₂)`.
    pub margin: f64,
    pub rhs: f64,
    pub area_s2: f64,
}

pub fn estimate_rhs(r: f64, h: f64) -> f64 {
    2.0 * PI * r * r + 4.0 * PI * h * h / (-libm::log(h))
}

pub fn catenoid_estimate_check(fam: &CatenoidFamily) -> Result<EstimateCheck> {
    if !(fam.h < 1.0) {
        return Err(Error::Domain(format!("need h < 1, got {}", fam.h)));
    }
    if !fam.in_maximality_regime() {
        return Err(Error::Precondition(format!(
            "need 2h < r·tanh(1), got r = {}, h = {}",
            fam.r, fam.h
        )));
    }
    let (_, s2) = fam.require_roots()?;
    let a2 = area(fam.r, fam.h, s2);
    let rhs = estimate_rhs(fam.r, fam.h);
    Ok(EstimateCheck {
        holds: a2 <= rhs,
        margin: rhs - a2,
        rhs,
        area_s2: a2,
    })
}

/// Largest `h` on a log-spaced scan (refined by bisection) such that the
/// catenoid estimate holds for every scanned `h' ≤ h`. This is a
/// measurement for the given `r`, not a proven threshold.
pub fn empirical_threshold(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("need r > 0, got {r}")));
    }
    let h_max = (0.5 * r * libm::tanh(1.0)).min(1.0) * (1.0 - 1e-9);
    let holds = |h: f64| {
        CatenoidFamily::new(r, h)
            .and_then(|f| catenoid_estimate_check(&f))
            .map(|c| c.holds)
            .unwrap_or(false)
    };
    let steps = 400;
    let lo_exp = libm::log10(h_max) - 12.0;
    let hi_exp = libm::log10(h_max);
    let mut prev = libm::pow(10.0, lo_exp);
    if !holds(prev) {
        return Ok(0.0);
    }
    for i in 1..=steps {
        let h = if i == steps {
            h_max
        } else {
            libm::pow(10.0, lo_exp + (hi_exp - lo_exp) * i as f64 / steps as f64)
        };
        if !holds(h) {
            let (mut a, mut b) = (prev, h);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if holds(m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(a);
        }
        prev = h;
    }
    Ok(h_max)
}

/// Row heights for a profile, spaced by arclength so pinched necks are
/// resolved. Returns `(z, ρ)` pairs from `z = -h` to `z = h`.
fn profile_rows(r: f64, h: f64, s: f64, rows: usize) -> Vec<(f64, f64)> {
    // Dense sampling graded toward the rims, where large-s profiles turn.
    let m = 4096;
    let mut zs: Vec<f64> = (0..=m).map(|i| h * i as f64 / m as f64).collect();
    for k in 1..=48 {
        let d = h * libm::pow(2.0, -(k as f64) / 2.0);
        zs.push(h - d);
    }
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    let pts: Vec<(f64, f64)> = zs
        .iter()
        .map(|&z| (z, profile(r, h, s, z).unwrap_or(r)))
        .collect();
    let mut cum = alloc::vec![0.0; pts.len()];
    for i in 1..pts.len() {
        let (dz, dr) = (pts[i].0 - pts[i - 1].0, pts[i].1 - pts[i - 1].1);
        cum[i] = cum[i - 1] + libm::hypot(dz, dr);
    }
    let total = cum[cum.len() - 1];
    let half_rows = rows.div_ceil(2).max(1);
    let mut upper = Vec::with_capacity(half_rows + 1);
    for j in 0..=half_rows {
        let target = total * j as f64 / half_rows as f64;
        let i = cum.partition_point(|&c| c < target).clamp(1, pts.len() - 1);
        let w = if cum[i] > cum[i - 1] {
            (target - cum[i - 1]) / (cum[i] - cum[i - 1])
        } else {
            0.0
        };
        let z = (pts[i - 1].0 + w * (pts[i].0 - pts[i - 1].0)).clamp(0.0, h);
        upper.push(z);
    }
    upper[0] = 0.0;
    upper[half_rows] = h;
    let mut out: Vec<f64> = upper.iter().rev().map(|&z| -z).collect();
    out.pop();
    out.extend(upper.iter().copied());
    out.into_iter()
        .map(|z| (z, profile(r, h, s, z).unwrap_or(r)))
        .collect()
}

/// Surface-of-revolution triangulation of the member `s` with `resolution`
/// angular segments. The rims are tagged as boundary vertices.
pub fn catenoid_mesh(fam: &CatenoidFamily, s: f64, resolution: u32) -> Result<TriMesh> {
    if resolution < 8 {
        return Err(Error::Domain(format!("resolution {resolution} < 8")));
    }
    if !(s >= 0.0) || s.is_infinite() {
        return Err(Error::Domain(format!("s = {s} must be finite and >= 0")));
    }
    let n = resolution as usize;
    let rows = profile_rows(fam.r, fam.h, s, n / 2);
    let mut vertices = Vec::with_capacity(rows.len() * n);
    let mut tags = Vec::with_capacity(rows.len() * n);
    for (i, &(z, rho)) in rows.iter().enumerate() {
        for k in 0..n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            vertices.push(Vec3::new(rho * libm::cos(phi), rho * libm::sin(phi), z));
            tags.push(VertexTag {
                on_sphere: i == 0 || i + 1 == rows.len(),
                axis: None,
                domain: 0,
            });
        }
    }
    let id = |i: usize, k: usize| (i * n + k % n) as u32;
    let mut faces = Vec::with_capacity(2 * n * rows.len());
    for i in 0..rows.len() - 1 {
        for k in 0..n {
            faces.push([id(i, k), id(i, k + 1), id(i + 1, k + 1)]);
            faces.push([id(i, k), id(i + 1, k + 1), id(i + 1, k)]);
        }
    }
    let mut mesh = TriMesh::new(vertices, faces)?;
    mesh.tags = tags;
    Ok(mesh)
}

/// The critical catenoid: the member of a family that meets the unit
/// sphere orthogonally along both rims. Its half-height in units of the
/// neck radius is `t₀`.
pub fn critical_catenoid() -> (CatenoidFamily, f64) {
    let t0 = tangency_root();
    let a = 1.0 / libm::sqrt(libm::cosh(t0) * libm::cosh(t0) + t0 * t0);
    let fam = CatenoidFamily {
        r: a * libm::cosh(t0),
        h: a * t0,
        roots: None,
    };
    (fam, 1.0 / a)
}
