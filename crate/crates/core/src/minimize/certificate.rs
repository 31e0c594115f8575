//! A-posteriori checks on a candidate free boundary minimal surface.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::area::{area_gradient, local_lengths, vertex_areas};
use super::project::Constraints;
use crate::geom::hurwitz::quotient_euler_characteristic;
use crate::geom::topology::{boundary_loops, edges, surface_topology};
use crate::geom::{equivariance_residual, equivariant_genus_solve, riemann_hurwitz_check};
use crate::geom::{Bvh, DihedralGroup, TriMesh, Vec3};
use crate::sweepout::mesh_tolerance;
use crate::{Error, Result};

/// Everything measured on a minimisation result. Fields that could not be
/// computed are `None` and the reason is in `error`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimalSurfaceCertificate {
    pub area: f64,
    /// Max over interior vertices of `|∇A_v| / A_v · ℓ_v`.
    pub mean_curvature_residual: f64,
    /// Max over boundary vertices of the angle between the outward
    /// conormal and the position vector, in radians.
    pub free_boundary_residual: f64,
    pub genus: Option<u32>,
    pub boundary_components: Option<usize>,
    /// Distance from `ξ_k ∩ B³` to the surface for `k = 1, …, n`.
    pub axis_residuals: Vec<f64>,
    pub xi0_intersections: u32,
    /// Largest angle between `ξ_0` and a surface normal where they meet.
    pub xi0_orthogonality: f64,
    pub equivariance_residual: Option<f64>,
    /// `(|Γ ∩ ξ_0| − 1) / 2` when the count is odd.
    pub j: Option<u32>,
    pub iterations: u32,
    pub gradient_norm: f64,
    pub converged: bool,
    pub stalled: bool,
    pub degenerate: bool,
    /// `3π − area` is within the mesh tolerance.
    pub near_three_pi: bool,
    pub error: Option<String>,
}

impl MinimalSurfaceCertificate {
    pub fn area_in_range(&self) -> bool {
        self.area > PI && self.area < 3.0 * PI && !self.near_three_pi
    }
}

/// Outward unit conormal per boundary vertex, averaged over its two
/// boundary edges; `None` off the boundary.
pub fn boundary_conormals(mesh: &TriMesh) -> Result<Vec<Option<Vec3>>> {
    let mut sum = alloc::vec![Vec3::ZERO; mesh.vertices.len()];
    let mut hit = alloc::vec![false; mesh.vertices.len()];
    for e in edges(mesh)?.iter().filter(|e| e.is_boundary()) {
        let f = mesh.faces[e.faces[0] as usize];
        let w = f
            .iter()
            .copied()
            .find(|&v| v != e.a && v != e.b)
            .unwrap_or(e.a);
        let (a, b, c) = (
            mesh.vertices[e.a as usize],
            mesh.vertices[e.b as usize],
            mesh.vertices[w as usize],
        );
        let Some(t) = (b - a).normalized() else {
            continue;
        };
        let inward = (c - a) - t * (c - a).dot(t);
        if let Some(nu) = (-inward).normalized() {
            for v in [e.a, e.b] {
                sum[v as usize] += nu;
                hit[v as usize] = true;
            }
        }
    }
    Ok(sum
        .into_iter()
        .zip(hit)
        .map(|(s, h)| if h { s.normalized() } else { None })
        .collect())
}

pub fn free_boundary_residual(mesh: &TriMesh) -> Result<f64> {
    let nus = boundary_conormals(mesh)?;
    Ok(nus
        .iter()
        .zip(&mesh.vertices)
        .filter_map(|(nu, &x)| nu.map(|nu| nu.angle(x)))
        .fold(0.0, f64::max))
}

pub(crate) fn mean_curvature_residual(mesh: &TriMesh, c: &Constraints) -> Result<f64> {
    let grad = area_gradient(mesh)?;
    let m = vertex_areas(mesh);
    let l = local_lengths(mesh);
    Ok((0..mesh.vertices.len())
        .filter(|&v| !c.on_sphere[v] && m[v] > 0.0)
        .map(|v| grad[v].norm() / m[v] * l[v])
        .fold(0.0, f64::max))
}

/// Largest distance from points of the diameter along `ξ_k` to the mesh,
/// for `k = 1, …, n`.
pub fn axis_residuals(bvh: &Bvh, group: &DihedralGroup) -> Vec<f64> {
    const SAMPLES: usize = 201;
    (1..=group.n())
        .map(|k| {
            let d = group.axis(k);
            (0..SAMPLES)
                .map(|i| {
                    let s = -1.0 + 2.0 * i as f64 / (SAMPLES - 1) as f64;
                    bvh.nearest(d * s, f64::INFINITY)
                        .map_or(f64::INFINITY, |h| h.0)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Crossings of `ξ_0` with the mesh and the largest angle between `ξ_0`
/// and the face normals there. The axis is offset by a tiny generic amount
/// so crossings at vertices are counted once; three offsets vote.
pub fn xi0_crossings(mesh: &TriMesh, bvh: &Bvh) -> (u32, f64) {
    let offsets = [(1e-9, 0.37e-9), (-0.61e-9, 0.83e-9), (0.22e-9, -1.1e-9)];
    let mut hits = Vec::new();
    let mut runs: Vec<(u32, f64)> = Vec::with_capacity(3);
    for (i, &(ox, oy)) in offsets.iter().enumerate() {
        bvh.segment_hits(Vec3::new(ox, oy, -1.0), Vec3::new(ox, oy, 1.0), &mut hits);
        let angle = hits
            .iter()
            .filter_map(|&(_, f)| mesh.face_normal(f as usize))
            .map(|n| libm::acos(n.z.abs().min(1.0)))
            .fold(0.0, f64::max);
        runs.push((hits.len() as u32, angle));
        if i == 1 && runs[0].0 == runs[1].0 {
            break;
        }
    }
    if runs.len() == 2 || runs[0].0 == runs[2].0 {
        runs[0]
    } else {
        runs[1]
    }
}

/// Run status to fold into a certificate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunStatus {
    pub iterations: u32,
    pub gradient_norm: f64,
    pub converged: bool,
    pub stalled: bool,
    pub degenerate: bool,
}

/// Measure every certificate field; never fails, recording problems in
/// `error` instead.
pub fn certify_surface(
    mesh: &TriMesh,
    group: Option<&DihedralGroup>,
    status: RunStatus,
) -> MinimalSurfaceCertificate {
    let mut errors: Vec<String> = Vec::new();
    let area = mesh.area();
    let bvh = Bvh::new(mesh);
    let (genus, boundary_components) = match surface_topology(mesh) {
        Ok(t) => (Some(t.genus), Some(t.boundary_components)),
        Err(e) => {
            errors.push(e.to_string());
            (None, None)
        }
    };
    let constraints = Constraints::new(mesh, None);
    let mean_curvature_residual = match constraints.and_then(|c| mean_curvature_residual(mesh, &c))
    {
        Ok(r) => r,
        Err(e) => {
            errors.push(e.to_string());
            f64::INFINITY
        }
    };
    let free_boundary_residual = free_boundary_residual(mesh).unwrap_or(f64::INFINITY);
    let (xi0_intersections, xi0_orthogonality) = xi0_crossings(mesh, &bvh);
    let j = (xi0_intersections % 2 == 1).then(|| (xi0_intersections - 1) / 2);
    let (axis_residuals, equivariance_residual) = match group {
        Some(g) => (
            axis_residuals(&bvh, g),
            equivariance_residual(mesh, g)
                .map_err(|e| errors.push(e.to_string()))
                .ok(),
        ),
        None => (Vec::new(), None),
    };
    let near_three_pi = match mesh_tolerance(mesh) {
        Ok(tol) => 3.0 * PI - area <= tol,
        Err(e) => {
            errors.push(e.to_string());
            true
        }
    };
    MinimalSurfaceCertificate {
        area,
        mean_curvature_residual,
        free_boundary_residual,
        genus,
        boundary_components,
        axis_residuals,
        xi0_intersections,
        xi0_orthogonality,
        equivariance_residual,
        j,
        iterations: status.iterations,
        gradient_norm: status.gradient_norm,
        converged: status.converged,
        stalled: status.stalled,
        degenerate: status.degenerate,
        near_three_pi,
        error: (!errors.is_empty()).then(|| errors.join("; ")),
    }
}

/// Largest axis residual accepted as containing the axes.
pub const AXIS_TOLERANCE: f64 = 1e-9;

/// Whether the `2n` points `q_k = (cos kπ/n, sin kπ/n, 0)`, `n = g + 1`,
/// all lie on one boundary loop. Requires the mesh to contain the
/// horizontal axes.
pub fn boundary_endpoint_check(mesh: &TriMesh, g: u32) -> Result<bool> {
    let group = DihedralGroup::for_genus(g)?;
    let bvh = Bvh::new(mesh);
    let worst = axis_residuals(&bvh, &group).into_iter().fold(0.0, f64::max);
    if !(worst <= AXIS_TOLERANCE) {
        return Err(Error::Precondition(format!(
            "surface does not contain the horizontal axes (residual {worst:.3e})"
        )));
    }
    let loops = boundary_loops(mesh)?;
    let tol = AXIS_TOLERANCE.max(1e-9 * mesh.max_edge_length());
    let n = group.n();
    let mut owner = None;
    for k in 0..2 * n {
        let q = Vec3::polar(k as f64 * PI / n as f64);
        let near = loops.iter().position(|lp| {
            (0..lp.len()).any(|i| {
                let a = mesh.vertices[lp[i] as usize];
                let b = mesh.vertices[lp[(i + 1) % lp.len()] as usize];
                crate::geom::bvh::closest_point_on_segment(q, a, b).distance(q) <= tol
            })
        });
        match (near, owner) {
            (None, _) => return Ok(false),
            (Some(l), None) => owner = Some(l),
            (Some(l), Some(o)) if l != o => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

/// Genus arithmetic for an equivariant surface meeting `ξ_0` in `2j + 1`
/// points: `γ = (g+1)γ′ + jg`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenusReport {
    pub g: u32,
    pub gamma: u32,
    pub j: u32,
    /// `(γ′, j)` solving the arithmetic for the measured `γ`.
    pub solution: Option<(u32, u32)>,
    /// Riemann–Hurwitz checked on the rotation quotient, when the mesh
    /// carries orbits.
    pub hurwitz: Option<bool>,
    pub passed: bool,
}

pub fn genus_certificate(mesh: &TriMesh, g: u32) -> Result<GenusReport> {
    let topo = surface_topology(mesh)?;
    if topo.boundary_components != 1 {
        return Err(Error::Precondition(format!(
            "expected one boundary loop, found {}",
            topo.boundary_components
        )));
    }
    let bvh = Bvh::new(mesh);
    let (count, _) = xi0_crossings(mesh, &bvh);
    if count % 2 == 0 {
        return Err(Error::InconsistentWithOrigin);
    }
    let j = (count - 1) / 2;
    let gamma = topo.genus;
    let solution = if (1..=g).contains(&gamma) {
        equivariant_genus_solve(g, gamma)?
    } else {
        None
    };
    let hurwitz = mesh
        .symmetry
        .as_ref()
        .filter(|s| s.n == g + 1)
        .and_then(|_| quotient_euler_characteristic(mesh).ok())
        .map(|chq| riemann_hurwitz_check(topo.euler_characteristic, chq, g, j));
    let passed = gamma == g && j == 1 && solution == Some((0, 1)) && hurwitz != Some(false);
    Ok(GenusReport {
        g,
        gamma,
        j,
        solution,
        hurwitz,
        passed,
    })
}
