//! `(M + αL)⁻¹` smoothing of a vertex field, with `M` the lumped vertex
//! areas and `L` a cotangent Laplacian whose weights are clamped to
//! `[0, MAX_WEIGHT]` so the operator stays positive definite on any mesh.

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{TriMesh, Vec3};

const MAX_WEIGHT: f64 = 1e3;

/// Symmetric positive definite operator in compressed rows.
pub(crate) struct Smoother {
    start: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
    diag: Vec<f64>,
}

impl Smoother {
    pub fn new(mesh: &TriMesh, mass: &[f64], alpha: f64) -> Self {
        let nv = mesh.vertices.len();
        let mut entries: Vec<(u32, u32, f64)> = Vec::with_capacity(6 * mesh.faces.len());
        for f in &mesh.faces {
            for k in 0..3 {
                let (o, i, j) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
                let (p, a, b) = (
                    mesh.vertices[o as usize],
                    mesh.vertices[i as usize],
                    mesh.vertices[j as usize],
                );
                let (u, v) = (a - p, b - p);
                let cross = u.cross(v).norm();
                let w = if cross > 0.0 {
                    (0.5 * u.dot(v) / cross).clamp(0.0, MAX_WEIGHT)
                } else {
                    0.0
                };
                if w > 0.0 {
                    entries.push((i, j, alpha * w));
                    entries.push((j, i, alpha * w));
                }
            }
        }
        entries.sort_unstable_by_key(|x| (x.0, x.1));
        let mut diag: Vec<f64> = mass.to_vec();
        let mut start = vec![0usize; nv + 1];
        let mut col = Vec::with_capacity(entries.len());
        let mut val = Vec::with_capacity(entries.len());
        let mut e = 0;
        for r in 0..nv {
            while e < entries.len() && entries[e].0 as usize == r {
                let c = entries[e].1;
                let mut w = 0.0;
                while e < entries.len() && entries[e].0 as usize == r && entries[e].1 == c {
                    w += entries[e].2;
                    e += 1;
                }
                diag[r] += w;
                col.push(c);
                val.push(-w);
            }
            start[r + 1] = col.len();
        }
        for d in &mut diag {
            if !(*d > 0.0) {
                *d = 1.0;
            }
        }
        Self {
            start,
            col,
            val,
            diag,
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..self.diag.len() {
            let mut s = self.diag[r] * x[r];
            for e in self.start[r]..self.start[r + 1] {
                s += self.val[e] * x[self.col[e] as usize];
            }
            out[r] = s;
        }
    }

    /// Jacobi-preconditioned conjugate gradients to relative residual `tol`.
    fn solve_scalar(&self, b: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
        let n = b.len();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return x;
        }
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut q = vec![0.0; n];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        for _ in 0..max_iter {
            self.apply(&p, &mut q);
            let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
            if !(pq > 0.0) {
                break;
            }
            let a = rz / pq;
            for i in 0..n {
                x[i] += a * p[i];
                r[i] -= a * q[i];
            }
            if norm(&r) <= tol * bnorm {
                break;
            }
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        x
    }

    pub fn solve(&self, b: &[Vec3], tol: f64, max_iter: usize) -> Vec<Vec3> {
        let comp = |k: usize| -> Vec<f64> {
            self.solve_scalar(&b.iter().map(|v| v[k]).collect::<Vec<_>>(), tol, max_iter)
        };
        let (x, y, z) = (comp(0), comp(1), comp(2));
        (0..b.len()).map(|i| Vec3::new(x[i], y[i], z[i])).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}
