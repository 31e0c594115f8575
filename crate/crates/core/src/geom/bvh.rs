//! Bounding volume hierarchy over triangles and a uniform point grid.

use alloc::vec::Vec;

use super::{TriMesh, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    /// Leaf: first triangle. Inner: index of the left child.
    first: u32,
    /// Leaf: triangle count. Inner: 0.
    count: u32,
}

/// Axis-aligned box tree over the faces of a mesh. Owns a copy of the
/// triangle corners so queries do not borrow the mesh.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    tris: Vec<[Vec3; 3]>,
    face_ids: Vec<u32>,
}

/// Closest point on the triangle `abc` to `p`.
pub fn closest_point_on_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = va + vb + vc;
    if denom.abs() < f64::MIN_POSITIVE || !denom.is_finite() {
        // Degenerate triangle: fall back to the closest edge point.
        let e = [(a, b), (b, c), (c, a)];
        let mut best = a;
        let mut bd = f64::INFINITY;
        for (u, v) in e {
            let q = closest_point_on_segment(p, u, v);
            let d = (q - p).norm_sq();
            if d < bd {
                bd = d;
                best = q;
            }
        }
        return best;
    }
    let v = vb / denom;
    let w = vc / denom;
    a + ab * v + ac * w
}

pub fn closest_point_on_segment(p: Vec3, a: Vec3, b: Vec3) -> Vec3 {
    let d = b - a;
    let len = d.norm_sq();
    if len <= 0.0 {
        return a;
    }
    a + d * ((p - a).dot(d) / len).clamp(0.0, 1.0)
}

/// Parameter `s ∈ [0, 1]` where segment `a + s(b - a)` crosses triangle
/// `tri`, if it does. Parallel and degenerate triangles never cross.
pub fn segment_triangle(a: Vec3, b: Vec3, tri: &[Vec3; 3]) -> Option<f64> {
    let d = b - a;
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let pv = d.cross(e2);
    let det = e1.dot(pv);
    let scale = e1.norm() * e2.norm() * d.norm();
    if !(det.abs() > 1e-14 * scale) {
        return None;
    }
    let inv = 1.0 / det;
    let tv = a - tri[0];
    let u = tv.dot(pv) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qv = tv.cross(e1);
    let v = d.dot(qv) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let s = e2.dot(qv) * inv;
    if (0.0..=1.0).contains(&s) {
        Some(s)
    } else {
        None
    }
}

fn box_distance_sq(p: Vec3, lo: Vec3, hi: Vec3) -> f64 {
    let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
    let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
    let dz = (lo.z - p.z).max(0.0).max(p.z - hi.z);
    dx * dx + dy * dy + dz * dz
}

fn segment_hits_box(a: Vec3, inv_d: Vec3, lo: Vec3, hi: Vec3) -> bool {
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for k in 0..3 {
        let (o, id, l, h) = (a[k], inv_d[k], lo[k], hi[k]);
        if id.is_infinite() {
            if o < l || o > h {
                return false;
            }
            continue;
        }
        let (mut ta, mut tb) = ((l - o) * id, (h - o) * id);
        if ta > tb {
            core::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}

impl Bvh {
    pub fn new(mesh: &TriMesh) -> Self {
        let nf = mesh.faces.len();
        let mut order: Vec<u32> = (0..nf as u32).collect();
        let centroids: Vec<Vec3> = (0..nf)
            .map(|f| {
                let [a, b, c] = mesh.corners(f);
                (a + b + c) / 3.0
            })
            .collect();
        let mut nodes = Vec::with_capacity(2 * nf / LEAF_SIZE + 2);
        nodes.push(Node {
            lo: Vec3::ZERO,
            hi: Vec3::ZERO,
            first: 0,
            count: 0,
        });
        let mut stack = alloc::vec![(0usize, 0usize, nf)];
        while let Some((node, start, end)) = stack.pop() {
            let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
            let mut hi = -lo;
            let mut clo = lo;
            let mut chi = hi;
            for &f in &order[start..end] {
                for v in mesh.corners(f as usize) {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                clo = clo.min(centroids[f as usize]);
                chi = chi.max(centroids[f as usize]);
            }
            nodes[node].lo = lo;
            nodes[node].hi = hi;
            if end - start <= LEAF_SIZE {
                nodes[node].first = start as u32;
                nodes[node].count = (end - start) as u32;
                continue;
            }
            let ext = chi - clo;
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            let mid = (start + end) / 2;
            order[start..end].select_nth_unstable_by(mid - start, |&p, &q| {
                centroids[p as usize][axis].total_cmp(&centroids[q as usize][axis])
            });
            let left = nodes.len();
            for _ in 0..2 {
                nodes.push(Node {
                    lo: Vec3::ZERO,
                    hi: Vec3::ZERO,
                    first: 0,
                    count: 0,
                });
            }
            nodes[node].first = left as u32;
            nodes[node].count = 0;
            stack.push((left, start, mid));
            stack.push((left + 1, mid, end));
        }
        let tris = order.iter().map(|&f| mesh.corners(f as usize)).collect();
        Self {
            nodes,
            tris,
            face_ids: order,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    /// Distance from `p` to the nearest triangle and that triangle's face
    /// index, searching only within `bound` (pass `f64::INFINITY` for an
    /// unbounded search). Returns `None` if nothing lies within `bound`.
    pub fn nearest(&self, p: Vec3, bound: f64) -> Option<(f64, u32)> {
        if self.tris.is_empty() {
            return None;
        }
        let mut best = bound * bound;
        let mut best_face = None;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let n = self.nodes[ni as usize];
            if box_distance_sq(p, n.lo, n.hi) > best {
                continue;
            }
            if n.count > 0 {
                for i in n.first..n.first + n.count {
                    let t = &self.tris[i as usize];
                    let q = closest_point_on_triangle(p, t[0], t[1], t[2]);
                    let d = (q - p).norm_sq();
                    if d <= best {
                        best = d;
                        best_face = Some(self.face_ids[i as usize]);
                    }
                }
            } else {
                let (l, r) = (n.first, n.first + 1);
                let dl = box_distance_sq(p, self.nodes[l as usize].lo, self.nodes[l as usize].hi);
                let dr = box_distance_sq(p, self.nodes[r as usize].lo, self.nodes[r as usize].hi);
                // Visit the nearer child first.
                if dl < dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best_face.map(|f| (libm::sqrt(best), f))
    }

    /// Parameters and face indices of every crossing of segment `ab`.
    pub fn segment_hits(&self, a: Vec3, b: Vec3, out: &mut Vec<(f64, u32)>) {
        out.clear();
        if self.tris.is_empty() {
            return;
        }
        let d = b - a;
        let inv = Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let n = self.nodes[ni as usize];
            if !segment_hits_box(a, inv, n.lo, n.hi) {
                continue;
            }
            if n.count > 0 {
                for i in n.first..n.first + n.count {
                    if let Some(s) = segment_triangle(a, b, &self.tris[i as usize]) {
                        out.push((s, self.face_ids[i as usize]));
                    }
                }
            } else {
                stack.push(n.first);
                stack.push(n.first + 1);
            }
        }
    }

    /// Number of triangles crossed by segment `ab`.
    pub fn crossing_count(&self, a: Vec3, b: Vec3) -> u32 {
        if self.tris.is_empty() {
            return 0;
        }
        let d = b - a;
        let inv = Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let mut count = 0;
        let mut stack = [0u32; 96];
        let mut top = 1usize;
        while top > 0 {
            top -= 1;
            let n = self.nodes[stack[top] as usize];
            if !segment_hits_box(a, inv, n.lo, n.hi) {
                continue;
            }
            if n.count > 0 {
                for i in n.first..n.first + n.count {
                    if segment_triangle(a, b, &self.tris[i as usize]).is_some() {
                        count += 1;
                    }
                }
            } else {
                stack[top] = n.first;
                stack[top + 1] = n.first + 1;
                top += 2;
            }
        }
        count
    }
}

/// Uniform grid over a point set for fixed-radius nearest queries.
#[derive(Debug, Clone)]
pub struct PointGrid {
    cell: f64,
    /// `(cell key, point index)` sorted by key.
    entries: Vec<(u64, u32)>,
}

fn cell_coord(x: f64, cell: f64) -> i64 {
    libm::floor(x / cell) as i64
}

fn cell_key(i: i64, j: i64, k: i64) -> u64 {
    const M: i64 = (1 << 21) - 1;
    (((i & M) as u64) << 42) | (((j & M) as u64) << 21) | ((k & M) as u64)
}

impl PointGrid {
    pub fn new(points: &[Vec3], cell: f64) -> Self {
        let mut entries: Vec<(u64, u32)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                (
                    cell_key(
                        cell_coord(p.x, cell),
                        cell_coord(p.y, cell),
                        cell_coord(p.z, cell),
                    ),
                    i as u32,
                )
            })
            .collect();
        entries.sort_unstable();
        Self { cell, entries }
    }

    /// Closest point within `tol` of `q` (requires `tol <= cell`).
    pub fn nearest_within(&self, points: &[Vec3], q: Vec3, tol: f64) -> Option<usize> {
        let (ci, cj, ck) = (
            cell_coord(q.x, self.cell),
            cell_coord(q.y, self.cell),
            cell_coord(q.z, self.cell),
        );
        let mut best = None;
        let mut bd = tol * tol;
        for di in -1..=1 {
            for dj in -1..=1 {
                for dk in -1..=1 {
                    let key = cell_key(ci + di, cj + dj, ck + dk);
                    let start = self.entries.partition_point(|e| e.0 < key);
                    for &(k, idx) in &self.entries[start..] {
                        if k != key {
                            break;
                        }
                        let d = (points[idx as usize] - q).norm_sq();
                        if d <= bd {
                            bd = d;
                            best = Some(idx as usize);
                        }
                    }
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = (Vec3::ZERO, Vec3::X, Vec3::Y);
        assert_eq!(
            closest_point_on_triangle(Vec3::new(-1.0, -1.0, 0.0), a, b, c),
            a
        );
        let q = closest_point_on_triangle(Vec3::new(0.2, 0.2, 3.0), a, b, c);
        assert!(q.distance(Vec3::new(0.2, 0.2, 0.0)) < 1e-15);
        let q = closest_point_on_triangle(Vec3::new(1.0, 1.0, 0.0), a, b, c);
        assert!(q.distance(Vec3::new(0.5, 0.5, 0.0)) < 1e-15);
    }

    #[test]
    fn nearest_matches_brute_force() {
        let m = TriMesh::polar_disc(24, 5).unwrap();
        let bvh = Bvh::new(&m);
        for k in 0..50 {
            let t = k as f64 * 0.37;
            let p = Vec3::new(
                libm::cos(t) * 1.3,
                libm::sin(2.0 * t),
                libm::cos(3.0 * t) * 0.4,
            );
            let brute = (0..m.faces.len())
                .map(|f| {
                    let [a, b, c] = m.corners(f);
                    closest_point_on_triangle(p, a, b, c).distance(p)
                })
                .fold(f64::INFINITY, f64::min);
            let (d, _) = bvh.nearest(p, f64::INFINITY).unwrap();
            assert!((d - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn segment_through_disc_crosses_once() {
        let m = TriMesh::polar_disc(16, 3).unwrap();
        let bvh = Bvh::new(&m);
        let a = Vec3::new(0.123, 0.271, -1.0);
        let b = Vec3::new(0.131, 0.262, 1.0);
        assert_eq!(bvh.crossing_count(a, b), 1);
        assert_eq!(bvh.crossing_count(a, Vec3::new(0.1, 0.2, -0.5)), 0);
    }

    #[test]
    fn point_grid_finds_partner() {
        let pts = alloc::vec![Vec3::ZERO, Vec3::X, Vec3::new(1.0, 1e-10, 0.0)];
        let g = PointGrid::new(&pts, 1e-6);
        assert_eq!(
            g.nearest_within(&pts, Vec3::new(1.0, 1.1e-10, 0.0), 1e-8),
            Some(2)
        );
        assert_eq!(g.nearest_within(&pts, Vec3::new(0.5, 0.0, 0.0), 1e-8), None);
    }
}
