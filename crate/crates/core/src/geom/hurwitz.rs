//! Topology of the quotient by the rotation subgroup `C_{g+1}`.

use alloc::vec;
use alloc::vec::Vec;

use super::{topology, TriMesh};
use crate::{Error, Result};

/// `χ(Γ) = (g+1)·χ(Γ') - (2j+1)·g` for a `C_{g+1}`-invariant surface whose
/// `2j+1` fixed points are the branch points of `Γ → Γ'`.
pub fn riemann_hurwitz_check(chi: i64, chi_quotient: i64, g: u32, j: u32) -> bool {
    let (g, j) = (g as i64, j as i64);
    chi == (g + 1) * chi_quotient - (2 * j + 1) * g
}

/// All pairs `(γ', j)` with `(g+1)γ' + jg = γ`. For `1 ≤ γ ≤ g` this has a
/// solution only when `γ = g`, and then it is `(0, 1)`.
pub fn equivariant_genus_solve(g: u32, gamma: u32) -> Result<Option<(u32, u32)>> {
    if g == 0 {
        return Err(Error::Domain("g must be positive".into()));
    }
    if gamma == 0 || gamma > g {
        return Err(Error::Domain("genus must satisfy 1 <= γ <= g".into()));
    }
    let mut found = None;
    for gq in 0..=gamma / (g + 1) {
        let rest = gamma - (g + 1) * gq;
        if rest.is_multiple_of(g) {
            found = Some((gq, rest / g));
        }
    }
    Ok(found)
}

fn orbit_representatives(perms: &[Vec<u32>], nv: usize) -> Vec<u32> {
    let mut rep: Vec<u32> = (0..nv as u32).collect();
    for perm in perms {
        for v in 0..nv {
            let w = perm[v] as usize;
            rep[v] = rep[v].min(w as u32);
        }
    }
    // One pass suffices for a group action: the orbit of v is {perm[v]}.
    rep
}

/// The quotient `Γ / C_n` as a mesh on orbit representatives.
pub fn quotient_mesh(mesh: &TriMesh) -> Result<TriMesh> {
    let sym = mesh.symmetry.as_ref().ok_or(Error::MissingOrbits)?;
    let rep = orbit_representatives(sym.rotations_only(), mesh.vertices.len());
    let mut keyed: Vec<([u32; 3], [u32; 3])> = mesh
        .faces
        .iter()
        .map(|f| {
            let r = [rep[f[0] as usize], rep[f[1] as usize], rep[f[2] as usize]];
            let mut k = r;
            k.sort_unstable();
            (k, r)
        })
        .collect();
    keyed.sort_unstable();
    keyed.dedup_by(|a, b| a.0 == b.0);
    let faces = keyed.into_iter().map(|(_, r)| r).collect();
    TriMesh::new(mesh.vertices.clone(), faces)
}

/// `χ(Γ/C_n)` by counting vertex, edge and face orbits.
pub fn quotient_euler_characteristic(mesh: &TriMesh) -> Result<i64> {
    let sym = mesh.symmetry.as_ref().ok_or(Error::MissingOrbits)?;
    let rot = sym.rotations_only();
    let nv = mesh.vertices.len();
    let rep = orbit_representatives(rot, nv);
    let mut used = vec![false; nv];
    for f in &mesh.faces {
        for &v in f {
            used[rep[v as usize] as usize] = true;
        }
    }
    let v_orbits = used.iter().filter(|&&u| u).count() as i64;
    let canon = |mut k: Vec<u32>| {
        k.sort_unstable();
        k
    };
    let mut e_keys: Vec<Vec<u32>> = topology::edges(mesh)?
        .iter()
        .map(|e| {
            rot.iter()
                .map(|p| canon(vec![p[e.a as usize], p[e.b as usize]]))
                .min()
                .unwrap_or_default()
        })
        .collect();
    e_keys.sort_unstable();
    e_keys.dedup();
    let mut f_keys: Vec<Vec<u32>> = mesh
        .faces
        .iter()
        .map(|f| {
            rot.iter()
                .map(|p| canon(f.iter().map(|&v| p[v as usize]).collect()))
                .min()
                .unwrap_or_default()
        })
        .collect();
    f_keys.sort_unstable();
    f_keys.dedup();
    Ok(v_orbits - e_keys.len() as i64 + f_keys.len() as i64)
}

/// Number of vertices fixed by every rotation: the branch points.
pub fn rotation_fixed_vertices(mesh: &TriMesh) -> Result<usize> {
    let sym = mesh.symmetry.as_ref().ok_or(Error::MissingOrbits)?;
    let rot = sym.rotations_only();
    let mut used = vec![false; mesh.vertices.len()];
    for f in &mesh.faces {
        for &v in f {
            used[v as usize] = true;
        }
    }
    Ok((0..mesh.vertices.len())
        .filter(|&v| used[v] && rot.iter().all(|p| p[v] as usize == v))
        .count())
}
