//! Inside/outside labels for points of the ball cut by a slice mesh.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geom::{Bvh, TriMesh, Vec3};
use crate::rng::{self, streams};
use crate::{Error, Result};

/// Voxels per axis of the label cache.
const GRID: usize = 128;
const MARKED: u32 = u32::MAX;
/// Cache entries for voxels with a known label; any other entry is the
/// index of the nearest such voxel.
const KNOWN_OUT: u32 = u32::MAX - 1;
const KNOWN_IN: u32 = u32::MAX - 2;
const NO_ANCHOR: u32 = u32::MAX - 3;

/// Side labels for points of the ball off a slice mesh.
///
/// The reference side is the one the topmost face's normal points into, so
/// reversing the mesh orientation swaps every label; for the sweepout slices
/// it holds the north pole. Labels come from crossing parity along segments
/// to reference points in the polar cap above the mesh.
///
/// A voxel cache makes labelling cheap: voxels inside the ball whose closure
/// meets no triangle bounding box are grouped into face-connected components,
/// each labelled once by the reference segments. A point in such a voxel takes its component's label;
/// any other point casts a short segment to the nearest labelled voxel centre.
pub struct SideField {
    bvh: Bvh,
    refs: [Vec3; 3],
    refs_inside: bool,
    /// `KNOWN_IN`, `KNOWN_OUT`, the nearest known voxel, or `NO_ANCHOR`.
    cache: Vec<u32>,
    /// Components whose reference rays did not all agree.
    pub ambiguous_components: usize,
}

#[inline]
fn cell_index(i: usize, j: usize, k: usize) -> usize {
    (i * GRID + j) * GRID + k
}

#[inline]
fn cell_width() -> f64 {
    2.0 / GRID as f64
}

fn cell_of(x: f64) -> usize {
    (((x + 1.0) / cell_width()) as isize).clamp(0, GRID as isize - 1) as usize
}

fn cell_center(c: usize) -> Vec3 {
    let k = c % GRID;
    let j = (c / GRID) % GRID;
    let i = c / (GRID * GRID);
    let w = cell_width();
    let at = |m: usize| -1.0 + (m as f64 + 0.5) * w;
    Vec3::new(at(i), at(j), at(k))
}

impl SideField {
    pub fn new(mesh: &TriMesh, seed: u64) -> Result<Self> {
        if mesh.faces.is_empty() {
            return Err(Error::Domain("empty mesh".into()));
        }
        let top = (0..mesh.face_count())
            .filter_map(|f| {
                let n = mesh.face_normal(f)?;
                if n.z.abs() < 0.5 {
                    return None;
                }
                let [a, b, c] = mesh.corners(f);
                Some(((a.z + b.z + c.z) / 3.0, n.z > 0.0))
            })
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .ok_or_else(|| Error::Geometry("no face with a usable normal".into()))?;
        let zmax = mesh
            .vertices
            .iter()
            .map(|v| v.z)
            .fold(f64::NEG_INFINITY, f64::max);
        if !(zmax < 1.0 - 1e-9) {
            return Err(Error::Geometry("mesh reaches the north pole".into()));
        }
        let mut r = rng::stream(seed, streams::SIDE_REFERENCES);
        let mut refs = [Vec3::ZERO; 3];
        for p in &mut refs {
            let z = zmax + (1.0 - zmax) * (0.4 + 0.3 * rng::uniform(&mut r));
            let rho = libm::sqrt(1.0 - z * z) * 0.8 * rng::uniform(&mut r);
            *p = Vec3::polar(2.0 * PI * rng::uniform(&mut r)) * rho + Vec3::Z * z;
        }
        let mut field = Self {
            bvh: Bvh::new(mesh),
            refs,
            refs_inside: top.1,
            cache: Vec::new(),
            ambiguous_components: 0,
        };
        field.build_cache(mesh);
        Ok(field)
    }

    fn build_cache(&mut self, mesh: &TriMesh) {
        let total = GRID * GRID * GRID;
        let w = cell_width();
        let mut marked = vec![false; total];
        // Voxels not strictly inside the ball.
        for (c, m) in marked.iter_mut().enumerate() {
            let p = cell_center(c);
            let far = Vec3::new(p.x.abs(), p.y.abs(), p.z.abs()) + Vec3::new(0.5, 0.5, 0.5) * w;
            *m = far.norm_sq() >= 1.0;
        }
        let pad = 1e-9;
        for f in 0..mesh.face_count() {
            let [a, b, c] = mesh.corners(f);
            let lo = a.min(b).min(c);
            let hi = a.max(b).max(c);
            let (i0, i1) = (cell_of(lo.x - pad), cell_of(hi.x + pad));
            let (j0, j1) = (cell_of(lo.y - pad), cell_of(hi.y + pad));
            let (k0, k1) = (cell_of(lo.z - pad), cell_of(hi.z + pad));
            for i in i0..=i1 {
                for j in j0..=j1 {
                    for k in k0..=k1 {
                        marked[cell_index(i, j, k)] = true;
                    }
                }
            }
        }

        let neighbours = |c: usize| {
            let k = c % GRID;
            let j = (c / GRID) % GRID;
            let i = c / (GRID * GRID);
            let mut out = [usize::MAX; 6];
            if i > 0 {
                out[0] = cell_index(i - 1, j, k);
            }
            if i + 1 < GRID {
                out[1] = cell_index(i + 1, j, k);
            }
            if j > 0 {
                out[2] = cell_index(i, j - 1, k);
            }
            if j + 1 < GRID {
                out[3] = cell_index(i, j + 1, k);
            }
            if k > 0 {
                out[4] = cell_index(i, j, k - 1);
            }
            if k + 1 < GRID {
                out[5] = cell_index(i, j, k + 1);
            }
            out
        };

        let mut cache = vec![MARKED; total];
        let mut queue = VecDeque::new();
        for start in 0..total {
            if marked[start] || cache[start] != MARKED {
                continue;
            }
            let (inside, agreed) = self.ray_label(cell_center(start));
            self.ambiguous_components += !agreed as usize;
            let id = if inside { KNOWN_IN } else { KNOWN_OUT };
            cache[start] = id;
            queue.push_back(start);
            while let Some(c) = queue.pop_front() {
                for m in neighbours(c) {
                    if m != usize::MAX && !marked[m] && cache[m] == MARKED {
                        cache[m] = id;
                        queue.push_back(m);
                    }
                }
            }
        }

        // Multi-source search from the known voxels.
        let mut anchor = vec![MARKED; total];
        for c in 0..total {
            if cache[c] != MARKED {
                anchor[c] = c as u32;
                queue.push_back(c);
            }
        }
        while let Some(c) = queue.pop_front() {
            for m in neighbours(c) {
                if m != usize::MAX && anchor[m] == MARKED {
                    anchor[m] = anchor[c];
                    queue.push_back(m);
                }
            }
        }
        for (c, a) in cache.iter_mut().zip(anchor) {
            if *c == MARKED {
                *c = if a == MARKED { NO_ANCHOR } else { a };
            }
        }
        self.cache = cache;
    }

    fn parity(&self, x: Vec3, k: usize) -> bool {
        self.bvh.crossing_count(x, self.refs[k]).is_multiple_of(2)
    }

    /// Label from segments to the reference points, by majority of three;
    /// also whether all three agreed.
    pub fn ray_label(&self, x: Vec3) -> (bool, bool) {
        let a = self.parity(x, 0);
        let b = self.parity(x, 1);
        let c = self.parity(x, 2);
        let same = if a == b { a } else { c };
        (same == self.refs_inside, a == b && b == c)
    }

    /// Whether `x` lies on the reference side.
    pub fn inside(&self, x: Vec3) -> bool {
        match self.cache[cell_index(cell_of(x.x), cell_of(x.y), cell_of(x.z))] {
            KNOWN_IN => true,
            KNOWN_OUT => false,
            NO_ANCHOR => self.ray_label(x).0,
            a => {
                let base = self.cache[a as usize] == KNOWN_IN;
                let odd = self.bvh.crossing_count(x, cell_center(a as usize)) % 2 == 1;
                base != odd
            }
        }
    }

    pub(super) fn near_surface(&self, x: Vec3, band: f64) -> bool {
        self.bvh.nearest(x, band).is_some()
    }
}
