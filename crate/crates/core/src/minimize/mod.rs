//! Equivariant discrete area descent with free boundary on the unit sphere.
//!
//! Projected gradient descent on the sum of triangle areas. Each step moves
//! vertices along the negative gradient, restricted to the motions the
//! constraints allow and smoothed by `(M + αL)⁻¹`, then orbit-averages and
//! projects back onto the constraints. A backtracking line search enforces area decrease and
//! rejects steps that fold a triangle over. The combinatorics never change,
//! so genus and boundary count are those of the seed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geom::{DihedralGroup, TriMesh, Vec3};
use crate::sweepout::{build_slice, SweepReport, SweepoutSchedule};
use crate::{Error, Result};

mod area;
mod certificate;
mod project;
mod sobolev;

pub use area::{area_gradient, discrete_area, local_lengths, max_aspect_ratio, vertex_areas};
pub use certificate::{
    axis_residuals, boundary_conormals, boundary_endpoint_check, certify_surface,
    free_boundary_residual, genus_certificate, xi0_crossings, GenusReport,
    MinimalSurfaceCertificate, RunStatus, AXIS_TOLERANCE,
};
pub use project::project_constraints;

use project::Constraints;
use sobolev::Smoother;

/// Sufficient-decrease constant of the line search.
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    /// First trial step, in units of length² (the direction is a mean
    /// curvature vector).
    pub initial_step: f64,
    /// Stop once `max_v |d_v|·ℓ_v` falls to this.
    pub gradient_tolerance: f64,
    pub max_iterations: u32,
    /// Line search gives up below this step.
    pub min_step: f64,
    /// Orbit-average every this many iterations.
    pub symmetrize_every: u32,
    /// Abort once the worst aspect ratio exceeds the seed's by this factor.
    pub max_aspect_growth: f64,
    /// Cap on one vertex's move, as a fraction of its smallest incident
    /// altitude.
    pub max_move: f64,
    /// Length² scale `α` of the `(M + αL)⁻¹` smoothing applied to the
    /// gradient; 0 gives the plain mass-normalised gradient.
    pub smoothing: f64,
    /// Symmetry to preserve; the seed must carry matching orbits.
    pub group: Option<DihedralGroup>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            initial_step: 1e-4,
            gradient_tolerance: 1e-6,
            max_iterations: 5000,
            min_step: 1e-18,
            symmetrize_every: 1,
            max_aspect_growth: 1e3,
            max_move: 0.25,
            smoothing: 0.05,
            group: None,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("initial_step", self.initial_step),
            ("gradient_tolerance", self.gradient_tolerance),
            ("min_step", self.min_step),
            ("max_move", self.max_move),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::Domain(format!(
                "smoothing must be >= 0, got {}",
                self.smoothing
            )));
        }
        if self.symmetrize_every < 1 {
            return Err(Error::Domain("symmetrize_every must be at least 1".into()));
        }
        if !(self.max_aspect_growth >= 1.0) {
            return Err(Error::Domain("max_aspect_growth must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub iteration: u32,
    pub area: f64,
    pub gradient_norm: f64,
    pub step: f64,
    pub free_boundary_residual: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub mesh: TriMesh,
    pub certificate: MinimalSurfaceCertificate,
    pub log: Vec<IterationRecord>,
}

fn face_cross(x: &[Vec3], f: &[u32; 3]) -> Vec3 {
    let (a, b, c) = (x[f[0] as usize], x[f[1] as usize], x[f[2] as usize]);
    (b - a).cross(c - a)
}

fn total_area(x: &[Vec3], faces: &[[u32; 3]]) -> f64 {
    faces.iter().map(|f| 0.5 * face_cross(x, f).norm()).sum()
}

/// Smallest altitude over the faces at each vertex.
fn min_altitudes(x: &[Vec3], faces: &[[u32; 3]]) -> Vec<f64> {
    let mut out = alloc::vec![f64::INFINITY; x.len()];
    for f in faces {
        let (a, b, c) = (x[f[0] as usize], x[f[1] as usize], x[f[2] as usize]);
        let longest = a.distance(b).max(b.distance(c)).max(c.distance(a));
        let h = face_cross(x, f).norm() / longest;
        for &v in f {
            out[v as usize] = out[v as usize].min(h);
        }
    }
    out
}

/// Descend from `seed` until the gradient tolerance, the iteration cap, a
/// line search failure or mesh degeneration. Only invalid options or a seed
/// without the orbits `opts.group` needs are errors; every other outcome
/// comes back with a certificate whose flags say how the run ended.
pub fn minimize(seed: &TriMesh, opts: &MinimizeOptions) -> Result<MinimizeOutcome> {
    opts.validate()?;
    let constraints = Constraints::new(seed, opts.group.as_ref())?;
    let mut mesh = seed.clone();
    constraints.project(&mut mesh.vertices, true);
    let faces = mesh.faces.clone();
    let aspect_cap = max_aspect_ratio(&mesh) * opts.max_aspect_growth;
    let mut area = total_area(&mesh.vertices, &faces);
    let mut tau = opts.initial_step;
    let mut status = RunStatus::default();
    let mut log = Vec::new();
    let mut note: Option<String> = None;
    let nv = mesh.vertices.len();
    let mut trial = alloc::vec![Vec3::ZERO; nv];

    'outer: for iter in 0..opts.max_iterations {
        let grad = match area_gradient(&mesh) {
            Ok(g) => g,
            Err(e) => {
                status.degenerate = true;
                note = Some(format!("{e}"));
                break;
            }
        };
        let mass = vertex_areas(&mesh);
        let len = local_lengths(&mesh);
        let mut pg = grad.clone();
        constraints.restrict(&mesh.vertices, &mut pg);
        let gnorm = (0..nv)
            .filter(|&v| mass[v] > 0.0)
            .map(|v| pg[v].norm() / mass[v] * len[v])
            .fold(0.0, f64::max);
        let mut d: Vec<Vec3> = if opts.smoothing > 0.0 {
            Smoother::new(&mesh, &mass, opts.smoothing).solve(&pg, 1e-8, 4 * nv.max(100))
        } else {
            pg.iter()
                .zip(&mass)
                .map(|(&g, &m)| if m > 0.0 { g / m } else { Vec3::ZERO })
                .collect()
        };
        for v in &mut d {
            *v = -*v;
        }
        constraints.restrict(&mesh.vertices, &mut d);
        status.gradient_norm = gnorm;
        log.push(IterationRecord {
            iteration: iter,
            area,
            gradient_norm: gnorm,
            step: tau,
            free_boundary_residual: free_boundary_residual(&mesh).unwrap_or(f64::INFINITY),
        });
        if gnorm <= opts.gradient_tolerance {
            status.converged = true;
            break;
        }
        let alt = min_altitudes(&mesh.vertices, &faces);
        let symmetrize = (iter + 1) % opts.symmetrize_every == 0;
        loop {
            for v in 0..nv {
                let mut step = d[v] * tau;
                let cap = opts.max_move * alt[v];
                let s = step.norm();
                if s > cap {
                    step *= cap / s;
                }
                trial[v] = mesh.vertices[v] + step;
            }
            constraints.project(&mut trial, symmetrize);
            let folded = faces
                .iter()
                .any(|f| face_cross(&trial, f).dot(face_cross(&mesh.vertices, f)) <= 0.0);
            let predicted: f64 = (0..nv)
                .map(|v| grad[v].dot(trial[v] - mesh.vertices[v]))
                .sum();
            let new_area = total_area(&trial, &faces);
            if !folded
                && predicted < 0.0
                && new_area < area
                && new_area <= area + ARMIJO * predicted
            {
                mesh.vertices.copy_from_slice(&trial);
                area = new_area;
                tau *= 1.5;
                break;
            }
            tau *= 0.5;
            if tau < opts.min_step {
                status.stalled = true;
                break 'outer;
            }
        }
        status.iterations = iter + 1;
        if max_aspect_ratio(&mesh) > aspect_cap {
            status.degenerate = true;
            note = Some("aspect ratio grew beyond the allowed factor".into());
            break;
        }
    }
    if opts.group.is_some() {
        constraints.project(&mut mesh.vertices, true);
    }
    let mut certificate = certify_surface(&mesh, opts.group.as_ref(), status);
    if let Some(n) = note {
        certificate.error = Some(match certificate.error.take() {
            Some(e) => format!("{n}; {e}"),
            None => n,
        });
    }
    Ok(MinimizeOutcome {
        mesh,
        certificate,
        log,
    })
}

/// Parameter of the largest-area slice of a certified sweep; among slices
/// within the mesh tolerance of the maximum the smallest `t` wins.
pub fn max_area_parameter(sweep: &SweepReport) -> Result<f64> {
    let top = sweep
        .slices
        .iter()
        .max_by(|a, b| a.area.total_cmp(&b.area))
        .ok_or_else(|| Error::Domain("empty sweep".into()))?;
    let floor = top.area - top.mesh_tolerance;
    Ok(sweep
        .slices
        .iter()
        .filter(|c| c.area >= floor)
        .map(|c| c.t)
        .fold(f64::INFINITY, f64::min))
}

/// The max-area slice of `sweep`, rebuilt at `resolution`, with its `t`.
pub fn max_slice_seed(
    schedule: &SweepoutSchedule,
    sweep: &SweepReport,
    resolution: u32,
) -> Result<(f64, TriMesh)> {
    let t = max_area_parameter(sweep)?;
    Ok((t, build_slice(schedule, t, resolution)?))
}

/// The critical catenoid, meeting the sphere orthogonally along both rims.
pub fn critical_catenoid_seed(resolution: u32) -> Result<TriMesh> {
    let (fam, s) = crate::catenoid::critical_catenoid();
    crate::catenoid::catenoid_mesh(&fam, s, resolution)
}

/// Options for an equivariant run on a genus-`g` seed.
pub fn options_for_genus(g: u32) -> Result<MinimizeOptions> {
    Ok(MinimizeOptions {
        group: Some(DihedralGroup::for_genus(g)?),
        ..MinimizeOptions::default()
    })
}
