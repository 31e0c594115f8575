use alloc::format;
use alloc::vec::Vec;

use super::{DihedralGroup, Isometry, Vec3};
use crate::{Error, Result};

/// Per-vertex bookkeeping carried by constructed meshes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VertexTag {
    /// Vertex is constrained to the unit sphere.
    pub on_sphere: bool,
    /// Index `k` of the symmetry axis `ξ_k` the vertex lies on.
    pub axis: Option<u32>,
    /// Fundamental-domain copy the vertex was generated in.
    pub domain: u32,
}

/// Vertex permutations realising a `D_n` action on a mesh.
///
/// `perms[i][v]` is the vertex that group element `i` (as indexed by
/// [`DihedralGroup::element`]) sends `v` to.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetry {
    pub n: u32,
    pub perms: Vec<Vec<u32>>,
}

impl Symmetry {
    pub fn group(&self) -> Result<DihedralGroup> {
        DihedralGroup::new(self.n)
    }

    #[inline]
    pub fn image(&self, element: usize, v: u32) -> u32 {
        self.perms[element][v as usize]
    }

    /// Restrict to the cyclic subgroup.
    pub fn rotations_only(&self) -> &[Vec<u32>] {
        &self.perms[..self.n as usize]
    }

    /// Build the permutations by matching each transformed vertex to a
    /// vertex within `tol`. Fails if some image has no partner.
    pub fn detect(mesh: &TriMesh, group: &DihedralGroup, tol: f64) -> Result<Self> {
        let grid = super::bvh::PointGrid::new(&mesh.vertices, tol.max(1e-12) * 4.0);
        let mut perms = Vec::with_capacity(group.order());
        for i in 0..group.order() {
            let m = group.matrix_at(i);
            let mut perm = Vec::with_capacity(mesh.vertices.len());
            for (v, &p) in mesh.vertices.iter().enumerate() {
                let q = m.apply(p);
                match grid.nearest_within(&mesh.vertices, q, tol) {
                    Some(w) => perm.push(w as u32),
                    None => {
                        return Err(Error::Geometry(format!(
                            "vertex {v} has no partner under group element {i}"
                        )))
                    }
                }
            }
            perms.push(perm);
        }
        Ok(Self {
            n: group.n(),
            perms,
        })
    }
}

/// Triangle mesh with optional tags, patch labels and symmetry.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    /// Either empty or one tag per vertex.
    pub tags: Vec<VertexTag>,
    /// Either empty or one patch label per face.
    pub face_labels: Vec<u32>,
    pub symmetry: Option<Symmetry>,
}

impl TriMesh {
    /// Validates indices and rejects faces with repeated vertices.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let nv = vertices.len() as u32;
        for (i, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= nv) {
                return Err(Error::DegenerateMesh(format!(
                    "face {i} references a missing vertex"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::DegenerateMesh(format!("face {i} repeats a vertex")));
            }
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateMesh(format!("vertex {i} is not finite")));
        }
        Ok(Self {
            vertices,
            faces,
            ..Self::default()
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    #[inline]
    pub fn corners(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// `(b - a) × (c - a)`, twice the area-weighted normal.
    #[inline]
    pub fn face_cross(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.corners(f);
        (b - a).cross(c - a)
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn face_normal(&self, f: usize) -> Option<Vec3> {
        self.face_cross(f).normalized()
    }

    /// Total area with compensated summation.
    pub fn area(&self) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for f in 0..self.faces.len() {
            let y = self.face_area(f) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut m: f64 = 0.0;
        for f in 0..self.faces.len() {
            let [a, b, c] = self.corners(f);
            m = m.max(a.distance(b)).max(b.distance(c)).max(c.distance(a));
        }
        m
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for &v in &self.vertices {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Copy with every vertex mapped by `iso`; symmetry data is dropped.
    pub fn transformed(&self, iso: &Isometry) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|&v| iso.apply(v)).collect(),
            faces: self.faces.clone(),
            tags: self.tags.clone(),
            face_labels: self.face_labels.clone(),
            symmetry: None,
        }
    }

    /// Copy with every face wound the other way.
    pub fn reversed(&self) -> TriMesh {
        let mut m = self.clone();
        for f in &mut m.faces {
            f.swap(1, 2);
        }
        m
    }

    /// Copy where old vertex `v` becomes `perm[v]`; symmetry is carried along.
    pub fn relabeled(&self, perm: &[u32]) -> Result<TriMesh> {
        let n = self.vertices.len();
        if perm.len() != n {
            return Err(Error::Domain("permutation length mismatch".into()));
        }
        let mut seen = alloc::vec![false; n];
        for &p in perm {
            if p as usize >= n || core::mem::replace(&mut seen[p as usize], true) {
                return Err(Error::Domain("not a permutation".into()));
            }
        }
        let mut vertices = alloc::vec![Vec3::ZERO; n];
        for (v, &p) in perm.iter().enumerate() {
            vertices[p as usize] = self.vertices[v];
        }
        let tags = if self.tags.is_empty() {
            Vec::new()
        } else {
            let mut t = alloc::vec![VertexTag::default(); n];
            for (v, &p) in perm.iter().enumerate() {
                t[p as usize] = self.tags[v];
            }
            t
        };
        let faces = self
            .faces
            .iter()
            .map(|f| {
                [
                    perm[f[0] as usize],
                    perm[f[1] as usize],
                    perm[f[2] as usize],
                ]
            })
            .collect();
        let symmetry = self.symmetry.as_ref().map(|s| Symmetry {
            n: s.n,
            perms: s
                .perms
                .iter()
                .map(|old| {
                    let mut new = alloc::vec![0u32; n];
                    for (v, &img) in old.iter().enumerate() {
                        new[perm[v] as usize] = perm[img as usize];
                    }
                    new
                })
                .collect(),
        });
        Ok(TriMesh {
            vertices,
            faces,
            tags,
            face_labels: self.face_labels.clone(),
            symmetry,
        })
    }

    /// Check that the stored permutations are consistent with the geometry
    /// and the face structure, returning the largest position mismatch.
    pub fn symmetry_defect(&self) -> Result<f64> {
        let sym = self.symmetry.as_ref().ok_or(Error::MissingOrbits)?;
        let group = sym.group()?;
        if sym.perms.len() != group.order() {
            return Err(Error::Geometry("wrong number of permutations".into()));
        }
        let mut worst: f64 = 0.0;
        for (i, perm) in sym.perms.iter().enumerate() {
            let m = group.matrix_at(i);
            for (v, &w) in perm.iter().enumerate() {
                let d = m
                    .apply(self.vertices[v])
                    .distance(self.vertices[w as usize]);
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    /// Unit disc in the plane `z = 0` as a polar grid with `segments`
    /// boundary edges and `rings` rings.
    pub fn polar_disc(segments: u32, rings: u32) -> Result<TriMesh> {
        if segments < 3 || rings < 1 {
            return Err(Error::Domain(
                "polar disc needs segments >= 3, rings >= 1".into(),
            ));
        }
        let mut vertices = alloc::vec![Vec3::ZERO];
        for i in 1..=rings {
            let r = i as f64 / rings as f64;
            for k in 0..segments {
                let phi = 2.0 * core::f64::consts::PI * k as f64 / segments as f64;
                vertices.push(Vec3::polar(phi) * r);
            }
        }
        let s = segments;
        let idx = |ring: u32, k: u32| -> u32 {
            if ring == 0 {
                0
            } else {
                1 + (ring - 1) * s + k % s
            }
        };
        let mut faces = Vec::new();
        for k in 0..s {
            faces.push([0, idx(1, k), idx(1, k + 1)]);
        }
        for ring in 1..rings {
            for k in 0..s {
                let (a, b) = (idx(ring, k), idx(ring, k + 1));
                let (c, d) = (idx(ring + 1, k), idx(ring + 1, k + 1));
                faces.push([a, c, d]);
                faces.push([a, d, b]);
            }
        }
        let mut mesh = TriMesh::new(vertices, faces)?;
        mesh.tags = (0..mesh.vertices.len())
            .map(|v| VertexTag {
                on_sphere: v as u32 >= idx(rings, 0),
                axis: if v == 0 { Some(0) } else { None },
                domain: 0,
            })
            .collect();
        Ok(mesh)
    }

    /// Polar disc carrying the `D_n` action by permutations. Requires
    /// `segments` to be a multiple of `2n` so every axis is a grid ray.
    pub fn equivariant_disc(n: u32, segments: u32, rings: u32) -> Result<TriMesh> {
        let group = DihedralGroup::new(n)?;
        if !segments.is_multiple_of(2 * n) {
            return Err(Error::Domain(format!(
                "segments {segments} must be a multiple of {}",
                2 * n
            )));
        }
        let mut mesh = TriMesh::polar_disc(segments, rings)?;
        let per_ray = segments / (2 * n);
        let perms = group
            .elements()
            .map(|e| {
                (0..mesh.vertices.len() as u32)
                    .map(|v| {
                        if v == 0 {
                            return 0;
                        }
                        let ring = (v - 1) / segments;
                        let k = (v - 1) % segments;
                        // Grid index k sits at angle kπ/(n·per_ray); the group
                        // acts on angles like it acts on rays, scaled.
                        let k2 = if e.flip {
                            (2 * e.rot * per_ray + 2 * segments - k) % segments
                        } else {
                            (2 * e.rot * per_ray + k) % segments
                        };
                        1 + ring * segments + k2
                    })
                    .collect()
            })
            .collect();
        mesh.symmetry = Some(Symmetry { n, perms });
        Ok(mesh)
    }
}
