//! Combinatorial topology of triangle meshes: edges, Euler characteristic,
//! boundary loops, orientability, components and genus.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::TriMesh;
use crate::{Error, Result};

/// Undirected edge `a < b` with up to two incident faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    /// Incident faces; the second is `u32::MAX` on boundary edges.
    pub faces: [u32; 2],
    /// Whether each incident face traverses the edge as `a → b`.
    pub forward: [bool; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.faces[1] == u32::MAX
    }
}

/// Unique edges of the mesh, sorted by `(a, b)`. Errors on edges with
/// more than two incident faces.
pub fn edges(mesh: &TriMesh) -> Result<Vec<Edge>> {
    let mut half: Vec<(u32, u32, u32, bool)> = Vec::with_capacity(3 * mesh.faces.len());
    for (fi, f) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            let (u, v) = (f[k], f[(k + 1) % 3]);
            let (a, b, fwd) = if u < v { (u, v, true) } else { (v, u, false) };
            half.push((a, b, fi as u32, fwd));
        }
    }
    half.sort_unstable();
    let mut out = Vec::with_capacity(half.len() / 2 + 1);
    let mut i = 0;
    while i < half.len() {
        let (a, b, f0, d0) = half[i];
        let mut j = i + 1;
        while j < half.len() && half[j].0 == a && half[j].1 == b {
            j += 1;
        }
        match j - i {
            1 => out.push(Edge {
                a,
                b,
                faces: [f0, u32::MAX],
                forward: [d0, false],
            }),
            2 => out.push(Edge {
                a,
                b,
                faces: [f0, half[i + 1].2],
                forward: [d0, half[i + 1].3],
            }),
            k => return Err(Error::NonManifoldEdge(a, b, k)),
        }
        i = j;
    }
    Ok(out)
}

/// Number of vertices referenced by at least one face.
pub fn used_vertex_count(mesh: &TriMesh) -> usize {
    let mut used = vec![false; mesh.vertices.len()];
    for f in &mesh.faces {
        for &v in f {
            used[v as usize] = true;
        }
    }
    used.iter().filter(|&&u| u).count()
}

/// `V - E + F`, counting only vertices that belong to some face.
pub fn euler_characteristic(mesh: &TriMesh) -> Result<i64> {
    let e = edges(mesh)?.len() as i64;
    Ok(used_vertex_count(mesh) as i64 - e + mesh.faces.len() as i64)
}

/// Closed boundary loops as vertex cycles, oriented as their faces induce.
pub fn boundary_loops(mesh: &TriMesh) -> Result<Vec<Vec<u32>>> {
    boundary_loops_from(&edges(mesh)?)
}

pub(crate) fn boundary_loops_from(edges: &[Edge]) -> Result<Vec<Vec<u32>>> {
    let mut directed: Vec<(u32, u32)> = edges
        .iter()
        .filter(|e| e.is_boundary())
        .map(|e| if e.forward[0] { (e.a, e.b) } else { (e.b, e.a) })
        .collect();
    directed.sort_unstable();
    // A boundary vertex with two outgoing boundary edges is a pinch point.
    for w in directed.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::UnsupportedTopology(format!(
                "boundary pinches at vertex {}",
                w[0].0
            )));
        }
    }
    let mut used = vec![false; directed.len()];
    let next_of = |v: u32| directed.binary_search_by(|probe| probe.0.cmp(&v)).ok();
    let mut loops = Vec::new();
    for start in 0..directed.len() {
        if used[start] {
            continue;
        }
        let mut lp = Vec::new();
        let mut cur = start;
        loop {
            used[cur] = true;
            lp.push(directed[cur].0);
            match next_of(directed[cur].1) {
                Some(nx) if nx == start => break,
                Some(nx) if !used[nx] => cur = nx,
                _ => {
                    return Err(Error::UnsupportedTopology(
                        "boundary edges do not close into loops".into(),
                    ))
                }
            }
        }
        loops.push(lp);
    }
    Ok(loops)
}

pub fn boundary_components(mesh: &TriMesh) -> Result<usize> {
    Ok(boundary_loops(mesh)?.len())
}

/// Face-connected components, as a component index per face.
pub fn face_components(mesh: &TriMesh) -> Result<(usize, Vec<u32>)> {
    let edges = edges(mesh)?;
    let mut parent: Vec<u32> = (0..mesh.faces.len() as u32).collect();
    fn find(p: &mut [u32], mut x: u32) -> u32 {
        while p[x as usize] != x {
            p[x as usize] = p[p[x as usize] as usize];
            x = p[x as usize];
        }
        x
    }
    for e in edges.iter().filter(|e| !e.is_boundary()) {
        let (a, b) = (find(&mut parent, e.faces[0]), find(&mut parent, e.faces[1]));
        if a != b {
            parent[a.max(b) as usize] = a.min(b);
        }
    }
    // Faces sharing only a vertex are still one component of the surface.
    let mut first_face = vec![u32::MAX; mesh.vertices.len()];
    for (fi, f) in mesh.faces.iter().enumerate() {
        for &v in f {
            let slot = &mut first_face[v as usize];
            if *slot == u32::MAX {
                *slot = fi as u32;
            } else {
                let (a, b) = (find(&mut parent, *slot), find(&mut parent, fi as u32));
                if a != b {
                    parent[a.max(b) as usize] = a.min(b);
                }
            }
        }
    }
    let mut label = vec![u32::MAX; mesh.faces.len()];
    let mut count = 0u32;
    let mut out = vec![0u32; mesh.faces.len()];
    for f in 0..mesh.faces.len() as u32 {
        let r = find(&mut parent, f) as usize;
        if label[r] == u32::MAX {
            label[r] = count;
            count += 1;
        }
        out[f as usize] = label[r];
    }
    Ok((count as usize, out))
}

/// True when every interior edge is traversed in opposite directions by
/// its two faces.
pub fn is_consistently_oriented(mesh: &TriMesh) -> Result<bool> {
    Ok(edges(mesh)?
        .iter()
        .filter(|e| !e.is_boundary())
        .all(|e| e.forward[0] != e.forward[1]))
}

/// Breadth-first orientation propagation. Returns per-face flips that make
/// the mesh consistently oriented, or [`Error::NonOrientable`].
pub fn orientation_flips(mesh: &TriMesh) -> Result<Vec<bool>> {
    let edges = edges(mesh)?;
    let nf = mesh.faces.len();
    let mut adj: Vec<Vec<(u32, bool)>> = vec![Vec::new(); nf];
    for e in edges.iter().filter(|e| !e.is_boundary()) {
        // Same traversal direction means one of the two must flip.
        let must_differ = e.forward[0] == e.forward[1];
        adj[e.faces[0] as usize].push((e.faces[1], must_differ));
        adj[e.faces[1] as usize].push((e.faces[0], must_differ));
    }
    let mut flip: Vec<Option<bool>> = vec![None; nf];
    let mut queue = alloc::collections::VecDeque::new();
    for seed in 0..nf {
        if flip[seed].is_some() {
            continue;
        }
        flip[seed] = Some(false);
        queue.push_back(seed);
        while let Some(f) = queue.pop_front() {
            let ff = flip[f].unwrap_or(false);
            for &(g, differ) in &adj[f] {
                let want = ff ^ differ;
                match flip[g as usize] {
                    None => {
                        flip[g as usize] = Some(want);
                        queue.push_back(g as usize);
                    }
                    Some(have) if have != want => return Err(Error::NonOrientable),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(flip.into_iter().map(|f| f.unwrap_or(false)).collect())
}

pub fn is_orientable(mesh: &TriMesh) -> Result<bool> {
    match orientation_flips(mesh) {
        Ok(_) => Ok(true),
        Err(Error::NonOrientable) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Summary of the topology of a connected orientable surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceTopology {
    pub euler_characteristic: i64,
    pub boundary_components: usize,
    pub genus: u32,
}

/// Genus `γ = (2 - b - χ) / 2` of a connected orientable surface.
pub fn genus(mesh: &TriMesh) -> Result<u32> {
    Ok(surface_topology(mesh)?.genus)
}

pub fn surface_topology(mesh: &TriMesh) -> Result<SurfaceTopology> {
    if mesh.faces.is_empty() {
        return Err(Error::UnsupportedTopology("empty mesh".into()));
    }
    let edges = edges(mesh)?;
    let chi = used_vertex_count(mesh) as i64 - edges.len() as i64 + mesh.faces.len() as i64;
    let (components, _) = face_components(mesh)?;
    if components != 1 {
        return Err(Error::UnsupportedTopology(format!(
            "surface has {components} components"
        )));
    }
    let flips = orientation_flips(mesh)?;
    let b = if flips.iter().any(|&f| f) {
        let mut m = mesh.clone();
        for (f, &flip) in m.faces.iter_mut().zip(&flips) {
            if flip {
                f.swap(1, 2);
            }
        }
        boundary_loops(&m)?.len()
    } else {
        boundary_loops_from(&edges)?.len()
    };
    let twice = 2 - b as i64 - chi;
    if twice < 0 || twice % 2 != 0 {
        return Err(Error::UnsupportedTopology(format!(
            "χ = {chi}, b = {b} give no integer genus"
        )));
    }
    Ok(SurfaceTopology {
        euler_characteristic: chi,
        boundary_components: b,
        genus: (twice / 2) as u32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;

    fn tetra() -> TriMesh {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        TriMesh::new(v, vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]]).unwrap()
    }

    /// Torus as an `m × n` grid with wrap-around.
    pub(crate) fn torus(m: u32, n: u32) -> TriMesh {
        let mut v = Vec::new();
        for i in 0..m {
            for j in 0..n {
                let (u, w) = (
                    2.0 * core::f64::consts::PI * i as f64 / m as f64,
                    2.0 * core::f64::consts::PI * j as f64 / n as f64,
                );
                let r = 1.0 + 0.3 * libm::cos(w);
                v.push(Vec3::new(
                    r * libm::cos(u),
                    r * libm::sin(u),
                    0.3 * libm::sin(w),
                ));
            }
        }
        let id = |i: u32, j: u32| (i % m) * n + j % n;
        let mut f = Vec::new();
        for i in 0..m {
            for j in 0..n {
                f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        TriMesh::new(v, f).unwrap()
    }

    #[test]
    fn closed_surfaces() {
        let t = tetra();
        assert_eq!(euler_characteristic(&t).unwrap(), 2);
        assert_eq!(boundary_components(&t).unwrap(), 0);
        assert_eq!(genus(&t).unwrap(), 0);
        let tor = torus(8, 6);
        assert_eq!(euler_characteristic(&tor).unwrap(), 0);
        assert_eq!(genus(&tor).unwrap(), 1);
    }

    #[test]
    fn disc_has_one_boundary_loop() {
        let d = TriMesh::polar_disc(12, 3).unwrap();
        assert_eq!(euler_characteristic(&d).unwrap(), 1);
        let loops = boundary_loops(&d).unwrap();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].len(), 12);
        assert_eq!(genus(&d).unwrap(), 0);
        assert!(is_consistently_oriented(&d).unwrap());
    }

    #[test]
    fn mobius_strip_is_non_orientable() {
        let n = 12u32;
        let mut v = Vec::new();
        for i in 0..n {
            let u = core::f64::consts::PI * 2.0 * i as f64 / n as f64;
            for s in [-0.3, 0.3] {
                let w = s * libm::cos(u / 2.0);
                v.push(Vec3::new(
                    (1.0 + w) * libm::cos(u),
                    (1.0 + w) * libm::sin(u),
                    s * libm::sin(u / 2.0),
                ));
            }
        }
        let mut f = Vec::new();
        for i in 0..n {
            let (a, b) = (2 * i, 2 * i + 1);
            let (c, d) = if i + 1 < n {
                (2 * (i + 1), 2 * (i + 1) + 1)
            } else {
                (1, 0)
            };
            f.push([a, c, d]);
            f.push([a, d, b]);
        }
        let m = TriMesh::new(v, f).unwrap();
        assert!(!is_orientable(&m).unwrap());
        assert_eq!(genus(&m), Err(Error::NonOrientable));
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let v = vec![Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::Z, -Vec3::Y];
        let m = TriMesh::new(v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap();
        assert!(matches!(edges(&m), Err(Error::NonManifoldEdge(0, 1, 3))));
    }

    #[test]
    fn two_components_are_rejected_for_genus() {
        let d = TriMesh::polar_disc(6, 1).unwrap();
        let mut v = d.vertices.clone();
        v.extend(d.vertices.iter().map(|&p| p + Vec3::new(5.0, 0.0, 0.0)));
        let off = d.vertices.len() as u32;
        let mut f = d.faces.clone();
        f.extend(d.faces.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        let m = TriMesh::new(v, f).unwrap();
        assert!(matches!(genus(&m), Err(Error::UnsupportedTopology(_))));
    }
}
