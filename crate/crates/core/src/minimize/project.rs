//! Constraint projection: free boundary on the sphere, the closed ball,
//! and exact equivariance by orbit averaging.

use alloc::vec::Vec;

use crate::geom::topology::boundary_loops;
use crate::geom::{DihedralGroup, Isometry, TriMesh, Vec3};
use crate::{Error, Result};

/// Per-vertex constraint data, fixed for the life of a run.
#[derive(Debug, Clone)]
pub(crate) struct Constraints {
    pub on_sphere: Vec<bool>,
    /// Previous and next vertex along the boundary loop.
    pub loop_neighbours: Vec<Option<(u32, u32)>>,
    pub axis: Vec<Option<u32>>,
    pub orbits: Option<Orbits>,
}

#[derive(Debug, Clone)]
pub(crate) struct Orbits {
    pub group: DihedralGroup,
    pub perms: Vec<Vec<u32>>,
    /// Inverse matrix of each element, by element index.
    pub inverses: Vec<Isometry>,
}

impl Constraints {
    pub fn new(mesh: &TriMesh, group: Option<&DihedralGroup>) -> Result<Self> {
        let nv = mesh.vertices.len();
        let mut loop_neighbours = alloc::vec![None; nv];
        let mut on_boundary = alloc::vec![false; nv];
        for lp in boundary_loops(mesh)? {
            let k = lp.len();
            for i in 0..k {
                loop_neighbours[lp[i] as usize] = Some((lp[(i + k - 1) % k], lp[(i + 1) % k]));
                on_boundary[lp[i] as usize] = true;
            }
        }
        let on_sphere = if mesh.tags.len() == nv {
            mesh.tags
                .iter()
                .zip(&on_boundary)
                .map(|(t, &b)| t.on_sphere || b)
                .collect()
        } else {
            on_boundary
        };
        let orbits = match group {
            None => None,
            Some(g) => {
                let sym = mesh.symmetry.as_ref().ok_or(Error::MissingOrbits)?;
                if sym.n != g.n() || sym.perms.len() != g.order() {
                    return Err(Error::Precondition(alloc::format!(
                        "mesh orbits are for D_{}, not D_{}",
                        sym.n,
                        g.n()
                    )));
                }
                let inverses = (0..g.order())
                    .map(|i| *g.matrix(g.inverse(g.element(i))))
                    .collect();
                Some(Orbits {
                    group: g.clone(),
                    perms: sym.perms.clone(),
                    inverses,
                })
            }
        };
        let axis = match (&orbits, mesh.tags.len() == nv) {
            (Some(_), true) => mesh.tags.iter().map(|t| t.axis).collect(),
            _ => alloc::vec![None; nv],
        };
        Ok(Self {
            on_sphere,
            loop_neighbours,
            axis,
            orbits,
        })
    }

    /// Replace each vertex by the group average of its pulled-back orbit.
    pub fn symmetrize(&self, x: &mut [Vec3]) {
        let Some(o) = &self.orbits else { return };
        let scale = 1.0 / o.perms.len() as f64;
        let avg: Vec<Vec3> = (0..x.len())
            .map(|v| {
                let mut s = Vec3::ZERO;
                for (perm, inv) in o.perms.iter().zip(&o.inverses) {
                    s += inv.apply(x[perm[v] as usize]);
                }
                s * scale
            })
            .collect();
        x.copy_from_slice(&avg);
    }

    /// Snap axis vertices, put sphere vertices on the sphere and pull any
    /// other vertex outside the ball back onto it.
    pub fn enforce(&self, x: &mut [Vec3]) {
        for (v, p) in x.iter_mut().enumerate() {
            if let (Some(k), Some(o)) = (self.axis[v], &self.orbits) {
                *p = if k == 0 {
                    Vec3::new(0.0, 0.0, p.z)
                } else {
                    let d = o.group.axis(k);
                    d * p.dot(d)
                };
            }
            let r = p.norm();
            if self.on_sphere[v] {
                if r > 0.0 {
                    *p = *p / r;
                }
            } else if r > 1.0 {
                *p = *p / r;
            }
        }
    }

    pub fn project(&self, x: &mut [Vec3], symmetrize: bool) {
        if symmetrize {
            self.symmetrize(x);
        }
        self.enforce(x);
    }

    /// Restrict a displacement field to motions the constraints allow to
    /// first order: sphere vertices move tangentially to the sphere and
    /// across, not along, their boundary loop; axis vertices move along
    /// their axis.
    pub fn restrict(&self, x: &[Vec3], d: &mut [Vec3]) {
        for v in 0..x.len() {
            if let (Some(k), Some(o)) = (self.axis[v], &self.orbits) {
                let a = o.group.axis(k);
                d[v] = a * d[v].dot(a);
            }
            if self.on_sphere[v] {
                let n = x[v].normalized().unwrap_or(Vec3::Z);
                d[v] -= n * d[v].dot(n);
                if let Some((p, q)) = self.loop_neighbours[v] {
                    let t = x[q as usize] - x[p as usize];
                    if let Some(t) = (t - n * t.dot(n)).normalized() {
                        d[v] -= t * d[v].dot(t);
                    }
                }
            }
        }
    }
}

/// Orbit-average every vertex, snap axis vertices to their axes, project
/// sphere vertices radially onto the sphere and clamp the rest to the ball.
pub fn project_constraints(mesh: &TriMesh, group: &DihedralGroup) -> Result<TriMesh> {
    let c = Constraints::new(mesh, Some(group))?;
    let mut out = mesh.clone();
    c.project(&mut out.vertices, true);
    Ok(out)
}
