use super::{Bvh, DihedralGroup, TriMesh};
use crate::{Error, Result};

/// `max_{φ ∈ G, v} dist(φ(v), M)`: how far the mesh is from being invariant
/// under the group, measured as one-sided vertex-to-surface distance.
///
/// When the mesh carries orbit permutations they seed the nearest-surface
/// search with a tight radius, and a partner closer than `PARTNER_EXACT`
/// is taken as the distance without searching.
pub fn equivariance_residual(mesh: &TriMesh, group: &DihedralGroup) -> Result<f64> {
    if mesh.faces.is_empty() {
        return Err(Error::Domain("empty mesh".into()));
    }
    let bvh = Bvh::new(mesh);
    equivariance_residual_with(mesh, group, &bvh)
}

/// Partner distances below this are reported as is.
const PARTNER_EXACT: f64 = 1e-12;

pub fn equivariance_residual_with(mesh: &TriMesh, group: &DihedralGroup, bvh: &Bvh) -> Result<f64> {
    let perms = mesh
        .symmetry
        .as_ref()
        .filter(|s| s.n == group.n() && s.perms.len() == group.order());
    let mut worst: f64 = 0.0;
    for i in 1..group.order() {
        let m = group.matrix_at(i);
        for (v, &p) in mesh.vertices.iter().enumerate() {
            let q = m.apply(p);
            let bound = match perms {
                Some(s) => {
                    let d = q.distance(mesh.vertices[s.perms[i][v] as usize]);
                    if d < PARTNER_EXACT {
                        worst = worst.max(d);
                        continue;
                    }
                    d * (1.0 + 1e-9)
                }
                None => f64::INFINITY,
            };
            let d = match bvh.nearest(q, bound) {
                Some((d, _)) => d,
                None => bound,
            };
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Isometry, Vec3};

    #[test]
    fn symmetric_disc_has_zero_residual() {
        let m = TriMesh::equivariant_disc(3, 24, 4).unwrap();
        let g = DihedralGroup::new(3).unwrap();
        assert!(equivariance_residual(&m, &g).unwrap() < 1e-14);
        let mut plain = m.clone();
        plain.symmetry = None;
        assert!(equivariance_residual(&plain, &g).unwrap() < 1e-14);
    }

    #[test]
    fn tilted_disc_is_not_invariant() {
        let m = TriMesh::polar_disc(24, 4)
            .unwrap()
            .transformed(&Isometry::rotation(Vec3::X, 0.2));
        let g = DihedralGroup::new(3).unwrap();
        let r = equivariance_residual(&m, &g).unwrap();
        // A flipped copy of the tilt sits at angle 0.4 from the mesh.
        assert!(r > 0.1, "{r}");
    }
}
