//! Discrete area and its exact gradient.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{TriMesh, Vec3};
use crate::{Error, Result};

/// Sum of triangle areas.
pub fn discrete_area(mesh: &TriMesh) -> f64 {
    mesh.area()
}

/// `∂A/∂x_v` for every vertex. For a triangle `(a, b, c)` with unit normal
/// `n`, `∂A/∂a = ½ n × (c − b)` and cyclically.
pub fn area_gradient(mesh: &TriMesh) -> Result<Vec<Vec3>> {
    let mut grad = vec![Vec3::ZERO; mesh.vertices.len()];
    for (f, face) in mesh.faces.iter().enumerate() {
        let [a, b, c] = mesh.corners(f);
        let n = mesh
            .face_normal(f)
            .ok_or_else(|| Error::DegenerateMesh(format!("face {f} has zero area")))?;
        let h = 0.5;
        grad[face[0] as usize] += n.cross(c - b) * h;
        grad[face[1] as usize] += n.cross(a - c) * h;
        grad[face[2] as usize] += n.cross(b - a) * h;
    }
    Ok(grad)
}

/// Lumped vertex areas: a third of the area of every incident face.
pub fn vertex_areas(mesh: &TriMesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.vertices.len()];
    for (f, face) in mesh.faces.iter().enumerate() {
        let a = mesh.face_area(f) / 3.0;
        for &v in face {
            m[v as usize] += a;
        }
    }
    m
}

/// Mean length of the edges at each vertex, counting interior edges twice.
pub fn local_lengths(mesh: &TriMesh) -> Vec<f64> {
    let mut sum = vec![0.0; mesh.vertices.len()];
    let mut count = vec![0u32; mesh.vertices.len()];
    for face in &mesh.faces {
        for k in 0..3 {
            let (u, v) = (face[k] as usize, face[(k + 1) % 3] as usize);
            let l = mesh.vertices[u].distance(mesh.vertices[v]);
            sum[u] += l;
            sum[v] += l;
            count[u] += 1;
            count[v] += 1;
        }
    }
    sum.iter()
        .zip(count)
        .map(|(&s, c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect()
}

/// Largest `ℓ_max² / (2·area)` over faces: `2/√3` for an equilateral
/// triangle, unbounded as faces flatten.
pub fn max_aspect_ratio(mesh: &TriMesh) -> f64 {
    (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.corners(f);
            let l = a.distance(b).max(b.distance(c)).max(c.distance(a));
            l * l / (2.0 * mesh.face_area(f))
        })
        .fold(0.0, f64::max)
}
