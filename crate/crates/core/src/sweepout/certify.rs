//! Area certificates for slices and whole sweepouts.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::bounds::{applicable_bound_in, bound_deficit_in};
use super::builder::{build_slice_in, labels};
use super::{Stage, SweepoutSchedule};
use crate::geom::topology::{boundary_loops, edges, surface_topology};
use crate::geom::{equivariance_residual, DihedralGroup, TriMesh};
use crate::Result;

/// Dihedral angles above this are treated as creases of the surface
/// rather than discretisation of a smooth patch.
const CREASE: f64 = PI / 6.0;

/// Safety factor applied to the summed per-edge error estimates.
const SAFETY: f64 = 10.0;

/// Estimated area error of a mesh against the piecewise smooth surface it
/// samples: bending of interior edges, chord defect of boundary edges and
/// floating point rounding, times a safety factor.
pub fn mesh_tolerance(mesh: &TriMesh) -> Result<f64> {
    let es = edges(mesh)?;
    let normals: Vec<_> = (0..mesh.face_count())
        .map(|f| mesh.face_normal(f))
        .collect();
    let mut total = 0.0;
    for e in &es {
        if e.is_boundary() {
            continue;
        }
        let (f0, f1) = (e.faces[0] as usize, e.faces[1] as usize);
        if let (Some(n0), Some(n1)) = (normals[f0], normals[f1]) {
            let theta = n0.angle(n1);
            if theta < CREASE {
                total += (mesh.face_area(f0) + mesh.face_area(f1)) * theta * theta / 8.0;
            }
        }
    }
    for lp in boundary_loops(mesh)? {
        let m = lp.len();
        let turn = |i: usize| -> f64 {
            let a = mesh.vertices[lp[(i + m - 1) % m] as usize];
            let b = mesh.vertices[lp[i] as usize];
            let c = mesh.vertices[lp[(i + 1) % m] as usize];
            let t = (b - a).angle(c - b);
            if t.is_finite() && t < CREASE {
                t
            } else {
                0.0
            }
        };
        for i in 0..m {
            let a = mesh.vertices[lp[i] as usize];
            let b = mesh.vertices[lp[(i + 1) % m] as usize];
            let l = a.distance(b);
            let theta = 0.5 * (turn(i) + turn((i + 1) % m));
            total += l * l * theta / 12.0;
        }
    }
    let scale = mesh
        .vertices
        .iter()
        .map(|v| v.max_abs())
        .fold(0.0, f64::max);
    let fp = 16.0 * f64::EPSILON * scale * scale * mesh.face_count() as f64 / 1024.0;
    Ok(SAFETY * total + fp)
}

/// Per-slice certificate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SliceCertificate {
    pub g: u32,
    pub t: f64,
    pub stage: Stage,
    pub resolution: u32,
    pub vertices: usize,
    pub faces: usize,
    pub area: f64,
    pub bound: f64,
    /// `3π − bound`, free of cancellation.
    pub bound_deficit: f64,
    pub mesh_tolerance: f64,
    pub genus: Option<u32>,
    pub boundary_components: Option<usize>,
    pub neck_components: Option<usize>,
    pub equivariance_residual: f64,
    pub max_edge_length: f64,
    pub genus_ok: bool,
    pub boundary_ok: bool,
    pub necks_ok: bool,
    pub equivariance_ok: bool,
    pub bound_ok: bool,
    pub below_three_pi: bool,
    pub error: Option<String>,
}

impl SliceCertificate {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.genus_ok
            && self.boundary_ok
            && self.necks_ok
            && self.equivariance_ok
            && self.bound_ok
            && self.below_three_pi
    }
}

fn wall_components(mesh: &TriMesh) -> Result<usize> {
    let faces: Vec<[u32; 3]> = mesh
        .faces
        .iter()
        .zip(&mesh.face_labels)
        .filter(|(_, &l)| l == labels::WALL)
        .map(|(f, _)| *f)
        .collect();
    let walls = TriMesh::new(mesh.vertices.clone(), faces)?;
    // Edge-connected components: vertex sharing at a pinch is not a join.
    let es = edges(&walls)?;
    let mut parent: Vec<usize> = (0..walls.face_count()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in &es {
        if !e.is_boundary() {
            let (a, b) = (
                find(&mut parent, e.faces[0] as usize),
                find(&mut parent, e.faces[1] as usize),
            );
            parent[a] = b;
        }
    }
    let mut roots: Vec<usize> = (0..walls.face_count())
        .map(|f| find(&mut parent, f))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(roots.len())
}

/// Build and certify one slice in an explicit stage.
pub fn certify_slice_in(
    schedule: &SweepoutSchedule,
    t: f64,
    stage: Stage,
    resolution: u32,
) -> Result<SliceCertificate> {
    let mesh = build_slice_in(schedule, t, stage, resolution)?;
    let bound = applicable_bound_in(schedule, t, stage)?;
    let group = DihedralGroup::new(schedule.n())?;
    let area = mesh.area();
    let tol = mesh_tolerance(&mesh)?;
    let max_edge = mesh.max_edge_length();
    let equiv = equivariance_residual(&mesh, &group)?;
    let (topo, error) = match surface_topology(&mesh) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let necks = wall_components(&mesh).ok();
    let n = schedule.n() as usize;
    Ok(SliceCertificate {
        g: schedule.g,
        t,
        stage,
        resolution,
        vertices: mesh.vertex_count(),
        faces: mesh.face_count(),
        area,
        bound,
        bound_deficit: bound_deficit_in(schedule, t, stage)?,
        mesh_tolerance: tol,
        genus: topo.map(|t| t.genus),
        boundary_components: topo.map(|t| t.boundary_components),
        neck_components: necks,
        equivariance_residual: equiv,
        max_edge_length: max_edge,
        genus_ok: topo.is_some_and(|t| t.genus == schedule.g),
        boundary_ok: topo.is_some_and(|t| t.boundary_components == 1),
        necks_ok: necks == Some(2 * n),
        equivariance_ok: equiv <= 2.0 * max_edge,
        bound_ok: area <= bound + tol,
        below_three_pi: area < 3.0 * PI,
        error,
    })
}

/// Build and certify the slice at `t`.
pub fn certify_slice(
    schedule: &SweepoutSchedule,
    t: f64,
    resolution: u32,
) -> Result<SliceCertificate> {
    certify_slice_in(schedule, t, schedule.stage(t)?, resolution)
}

/// Parameter grid with `count` points: most of them uniform on `[t0, 1)`
/// and a share of at least one in each of the three short stages, which
/// together occupy only `(0, t0)`.
pub fn sweep_grid(schedule: &SweepoutSchedule, count: usize) -> Vec<f64> {
    let t0 = schedule.t0;
    let short = (count / 20).max(1);
    if count < 4 * short + 1 {
        return (1..=count).map(|i| i as f64 / (count + 1) as f64).collect();
    }
    let long = count - 3 * short;
    let mut out = Vec::with_capacity(count);
    for i in 1..=short {
        out.push(0.25 * t0 * i as f64 / (short + 1) as f64);
    }
    for i in 0..short {
        out.push(0.25 * t0 + 0.25 * t0 * i as f64 / short as f64);
    }
    for i in 0..short {
        out.push(0.5 * t0 + 0.5 * t0 * i as f64 / short as f64);
    }
    for i in 0..long {
        out.push(t0 + (1.0 - t0) * i as f64 / long as f64);
    }
    out
}

/// Area jump across a stage boundary, each side built in its own stage.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageJump {
    pub t: f64,
    pub before: Stage,
    pub after: Stage,
    pub area_before: f64,
    pub area_after: f64,
    pub tolerance: f64,
    pub ok: bool,
}

/// Areas on both sides of the three interior stage boundaries.
pub fn stage_jumps(schedule: &SweepoutSchedule, resolution: u32) -> Result<Vec<StageJump>> {
    let t0 = schedule.t0;
    let pairs = [
        (t0, Stage::Ribbons, Stage::Replacement),
        (0.5 * t0, Stage::Replacement, Stage::Widening),
        (0.25 * t0, Stage::Widening, Stage::Retraction),
    ];
    pairs
        .iter()
        .map(|&(t, before, after)| {
            let a = build_slice_in(schedule, t, before, resolution)?;
            let b = build_slice_in(schedule, t, after, resolution)?;
            let tolerance = mesh_tolerance(&a)?.max(mesh_tolerance(&b)?);
            let (area_before, area_after) = (a.area(), b.area());
            Ok(StageJump {
                t,
                before,
                after,
                area_before,
                area_after,
                tolerance,
                ok: (area_before - area_after).abs() <= tolerance,
            })
        })
        .collect()
}

/// Summary of a certified sweepout.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepReport {
    pub schedule: SweepoutSchedule,
    pub resolution: u32,
    pub slices: Vec<SliceCertificate>,
    pub jumps: Vec<StageJump>,
    pub max_area: f64,
    pub max_area_t: f64,
    pub margin: f64,
    pub required_margin: f64,
    pub margin_ok: bool,
    /// Area is non-decreasing in `t` over the widening and retraction stages.
    pub retraction_monotone: bool,
    pub all_slices_pass: bool,
}

impl SweepReport {
    pub fn from_parts(
        schedule: SweepoutSchedule,
        resolution: u32,
        mut slices: Vec<SliceCertificate>,
        jumps: Vec<StageJump>,
    ) -> Self {
        slices.sort_by(|a, b| a.t.total_cmp(&b.t));
        let (max_area, max_area_t, tol) =
            slices.iter().map(|c| (c.area, c.t, c.mesh_tolerance)).fold(
                (f64::NEG_INFINITY, 0.0, 0.0),
                |acc, x| if x.0 > acc.0 { x } else { acc },
            );
        let margin = 3.0 * PI - max_area;
        let required_margin = 2.0 * PI * schedule.t0 * schedule.t0 - tol;
        let late: Vec<&SliceCertificate> = slices
            .iter()
            .filter(|c| matches!(c.stage, Stage::Widening | Stage::Retraction))
            .collect();
        let retraction_monotone = late
            .windows(2)
            .all(|w| w[1].area >= w[0].area - 1e-12 * w[0].area);
        let all_slices_pass = slices.iter().all(|c| c.passed()) && jumps.iter().all(|j| j.ok);
        Self {
            schedule,
            resolution,
            slices,
            jumps,
            max_area,
            max_area_t,
            margin,
            required_margin,
            margin_ok: margin >= required_margin,
            retraction_monotone,
            all_slices_pass,
        }
    }

    pub fn passed(&self) -> bool {
        self.all_slices_pass && self.margin_ok && self.retraction_monotone
    }
}

/// Certify every slice of `grid` serially.
pub fn certify_sweep(
    schedule: &SweepoutSchedule,
    grid: &[f64],
    resolution: u32,
) -> Result<SweepReport> {
    let slices = grid
        .iter()
        .map(|&t| certify_slice(schedule, t, resolution))
        .collect::<Result<Vec<_>>>()?;
    let jumps = stage_jumps(schedule, resolution)?;
    Ok(SweepReport::from_parts(
        *schedule, resolution, slices, jumps,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweepout::default_schedule;

    #[test]
    fn disc_tolerance_covers_chord_defect() {
        let m = TriMesh::polar_disc(64, 8).unwrap();
        let tol = mesh_tolerance(&m).unwrap();
        let err = PI - m.area();
        assert!(tol > err && tol < 40.0 * err, "{tol} vs {err}");
    }

    #[test]
    fn grid_covers_every_stage() {
        let s = default_schedule(1).unwrap();
        let g = sweep_grid(&s, 200);
        assert_eq!(g.len(), 200);
        assert!(g.iter().all(|&t| t > 0.0 && t < 1.0));
        for st in [
            Stage::Ribbons,
            Stage::Replacement,
            Stage::Widening,
            Stage::Retraction,
        ] {
            assert!(g.iter().filter(|&&t| s.stage(t).unwrap() == st).count() >= 10);
        }
    }
}
