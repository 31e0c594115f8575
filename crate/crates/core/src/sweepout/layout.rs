//! Planar layout of one wedge of the unit disc.
//!
//! The disc is cut by `n` axes into `2n` wedges of angle `ω = π/n`. Wedge
//! `W_j` spans polar angles `[jω, (j+1)ω]` and has its anchor point on the
//! unit circle at angle `(j + ½)ω`. Points of a wedge are addressed in polar
//! coordinates `(θ, ρ)` around the anchor, with `θ = 0` pointing at the origin.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geom::Vec3;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Wedge {
    pub alpha: f64,
    pub omega: f64,
    pub p: Vec3,
    /// Inward unit normals of the two bounding axis lines.
    normals: [Vec3; 2],
}

impl Wedge {
    pub fn new(n: u32, index: i32) -> Self {
        let omega = PI / n as f64;
        let alpha = (index as f64 + 0.5) * omega;
        let lo = alpha - 0.5 * omega;
        let hi = alpha + 0.5 * omega;
        Self {
            alpha,
            omega,
            p: Vec3::polar(alpha),
            normals: [Vec3::polar(lo + 0.5 * PI), Vec3::polar(hi - 0.5 * PI)],
        }
    }

    /// Unit direction from the anchor at angle `θ`.
    #[inline]
    pub fn dir(&self, theta: f64) -> Vec3 {
        -Vec3::polar(self.alpha + theta)
    }

    /// Distance from the anchor to the wedge boundary along `dir(θ)`.
    pub fn exit(&self, theta: f64) -> f64 {
        let u = self.dir(theta);
        let c = libm::cos(theta);
        let mut best = if c > 0.0 { 2.0 * c } else { 0.0 };
        for nk in self.normals {
            let un = u.dot(nk);
            if un < 0.0 {
                best = best.min(-self.p.dot(nk) / un);
            }
        }
        best.max(0.0)
    }

    #[inline]
    pub fn at(&self, theta: f64, rho: f64) -> Vec3 {
        self.p + self.dir(theta) * rho
    }

    /// `(θ, ρ)` of a layout point.
    pub fn polar_of(&self, x: Vec3) -> (f64, f64) {
        let d = Vec3::new(x.x - self.p.x, x.y - self.p.y, 0.0);
        let u0 = -self.p;
        let cross = u0.x * d.y - u0.y * d.x;
        (libm::atan2(cross, u0.dot(d)), libm::hypot(d.x, d.y))
    }

    /// Angle at the anchor between the origin and either wedge corner.
    pub fn corner_angle(&self) -> f64 {
        0.5 * PI - 0.25 * self.omega
    }

    /// Retraction `F_λ` with lens radius `b`: fixes the wedge boundary and
    /// pushes the lens `ρ ≤ b` out until it fills the wedge at `λ = 1`.
    pub fn retract(&self, x: Vec3, b: f64, lambda: f64) -> Vec3 {
        if lambda <= 0.0 {
            return x;
        }
        let (theta, rho) = self.polar_of(x);
        if rho == 0.0 {
            return x;
        }
        let l = self.exit(theta);
        if l <= b {
            return x;
        }
        let beta = (1.0 - lambda) * b + lambda * l;
        let sigma = if rho <= b {
            rho * beta / b
        } else {
            beta + (rho - b) * (l - beta) / (l - b)
        };
        self.at(theta, sigma)
    }
}

/// Where a column of the bitten-wedge grid ends on the outer boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ColumnEnd {
    /// On the unit circle.
    Arc,
    /// On the ray through the wedge's upper corner (`side = 1`) or lower
    /// corner (`side = 0`), `k` steps out from the origin.
    Ray { side: u32, k: u32 },
}

/// Grid counts per wedge for a given resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct GridCounts {
    pub m_side: u32,
    pub m_mid: u32,
    pub n_theta: u32,
    pub n_full: u32,
    pub n_z: u32,
    pub n_u: u32,
}

impl GridCounts {
    /// `per_wedge` boundary segments per wedge.
    pub fn new(per_wedge: u32) -> Self {
        let per_wedge = per_wedge.max(8);
        let m_side = (per_wedge / 2).max(2);
        let m_mid = (per_wedge / 4).max(2);
        Self {
            m_side,
            m_mid,
            n_theta: 2 * (m_side + m_mid),
            n_full: per_wedge,
            n_z: (per_wedge / 2).max(4),
            n_u: (per_wedge / 4).max(4),
        }
    }

    pub fn column_end(&self, j: u32) -> ColumnEnd {
        let a = self.m_side;
        let o = self.m_side + self.m_mid;
        let b = o + self.m_mid;
        if j < a || j > b {
            ColumnEnd::Arc
        } else if j <= o {
            ColumnEnd::Ray { side: 1, k: o - j }
        } else {
            ColumnEnd::Ray { side: 0, k: j - o }
        }
    }
}

/// Column angles for lens radius `b`, ascending from `−θ_E` to `θ_E`.
pub(crate) fn theta_grid(w: &Wedge, counts: &GridCounts, b: f64) -> Vec<f64> {
    let te = libm::acos((0.5 * b).min(1.0));
    let tc = w.corner_angle().min(te);
    let mut out = Vec::with_capacity(counts.n_theta as usize + 1);
    let seg = |out: &mut Vec<f64>, a: f64, c: f64, m: u32, last: bool| {
        for i in 0..m + last as u32 {
            out.push(a + (c - a) * i as f64 / m as f64);
        }
    };
    seg(&mut out, -te, -tc, counts.m_side, false);
    seg(&mut out, -tc, 0.0, counts.m_mid, false);
    seg(&mut out, 0.0, tc, counts.m_mid, false);
    seg(&mut out, tc, te, counts.m_side, true);
    out
}

/// Radial weights in `[0, 1]`: geometric near the bite, uniform beyond.
pub(crate) fn radial_weights(b: f64, counts: &GridCounts) -> Vec<f64> {
    let h = 1.0 / counts.n_u as f64;
    let mut d = (b * PI / counts.n_theta as f64).clamp(1e-13, h);
    let mut w = Vec::new();
    w.push(0.0);
    let mut x = 0.0;
    while d < h && x + d < 1.0 - h {
        x += d;
        w.push(x);
        d *= 2.0;
    }
    let rest = 1.0 - x;
    let k = libm::ceil(rest / h).max(1.0) as u32;
    for i in 1..=k {
        w.push(if i == k {
            1.0
        } else {
            x + rest * i as f64 / k as f64
        });
    }
    w
}

/// Radii along an axis ray of the outer ends of the bitten-wedge columns,
/// `k = 0` at the origin, `k = m_mid` at the unit circle.
pub(crate) fn ray_radii(w: &Wedge, counts: &GridCounts) -> Vec<f64> {
    let tc = w.corner_angle();
    (0..=counts.m_mid)
        .map(|k| {
            if k == 0 {
                0.0
            } else if k == counts.m_mid {
                1.0
            } else {
                let theta = tc * k as f64 / counts.m_mid as f64;
                w.at(theta, w.exit(theta)).norm()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_hits_the_wedge_boundary() {
        for n in 2..7 {
            let w = Wedge::new(n, 0);
            assert!((w.exit(0.0) - 1.0).abs() < 1e-14);
            let tc = w.corner_angle();
            assert!((w.at(tc, w.exit(tc)) - Vec3::polar(0.0)).norm() < 1e-12);
            assert!((w.at(-tc, w.exit(-tc)) - Vec3::polar(w.omega)).norm() < 1e-12);
            for i in 0..50 {
                let th = -1.5 + 3.0 * i as f64 / 49.0;
                let q = w.at(th, w.exit(th));
                let on_circle = (q.norm() - 1.0).abs() < 1e-12;
                let ang = libm::atan2(q.y, q.x);
                let on_ray = q.y.abs() < 1e-12 || (ang - w.omega).abs() < 1e-12 || q.norm() < 1e-12;
                assert!(on_circle || on_ray, "n={n} th={th} q={q:?}");
            }
        }
    }

    #[test]
    fn bite_endpoints_lie_on_the_circle() {
        let w = Wedge::new(3, 0);
        let c = GridCounts::new(16);
        let b = 0.3;
        let g = theta_grid(&w, &c, b);
        assert_eq!(g.len() as u32, c.n_theta + 1);
        assert!((w.at(g[0], b).norm() - 1.0).abs() < 1e-14);
        assert!((w.at(*g.last().unwrap(), b).norm() - 1.0).abs() < 1e-14);
        assert_eq!(
            c.column_end(c.m_side + c.m_mid),
            ColumnEnd::Ray { side: 1, k: 0 }
        );
        assert_eq!(
            c.column_end(c.m_side),
            ColumnEnd::Ray {
                side: 1,
                k: c.m_mid
            }
        );
    }

    #[test]
    fn retraction_fixes_boundary_and_fills_wedge() {
        let n = 3;
        let w = Wedge::new(n, 2);
        let b = 0.2;
        for i in 0..40 {
            let th = -1.4 + 2.8 * i as f64 / 39.0;
            let l = w.exit(th);
            if l <= b {
                continue;
            }
            let edge = w.at(th, l);
            assert!((w.retract(edge, b, 0.7) - edge).norm() < 1e-12);
            let lens = w.at(th, b);
            assert!((w.retract(lens, b, 1.0) - edge).norm() < 1e-12);
            let mid = w.at(th, 0.5 * (b + l));
            assert!((w.retract(mid, b, 0.0) - mid).norm() == 0.0);
        }
    }

    #[test]
    fn weights_are_increasing() {
        let c = GridCounts::new(32);
        for b in [1e-9, 1e-3, 0.3] {
            let w = radial_weights(b, &c);
            assert_eq!(w[0], 0.0);
            assert_eq!(*w.last().unwrap(), 1.0);
            assert!(w.windows(2).all(|p| p[1] > p[0]));
            assert!(w.len() < 80);
        }
    }
}
