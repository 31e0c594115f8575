//! Equivariant slice meshes.
//!
//! A slice is assembled from a fundamental piece on which `D_n` acts simply
//! transitively: the bitten wedge `W_0` of the middle sheet and of the upper
//! sheet, the full wedge `W_{-1}` of the upper sheet, and the wall joining
//! the two bites at the anchor of `W_0`. The `2n` images are welded along
//! the axis rays and the sheet centres, which yields the vertex
//! permutations of the group action for free.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::layout::{radial_weights, ray_radii, theta_grid, ColumnEnd, GridCounts, Wedge};
use super::{Stage, SweepoutSchedule};
use crate::geom::{DihedralGroup, Symmetry, TriMesh, Vec3, VertexTag};
use crate::{Error, Result};

/// Face labels of slice meshes.
pub mod labels {
    pub const UPPER: u32 = 0;
    pub const MIDDLE: u32 = 1;
    pub const LOWER: u32 = 2;
    pub const WALL: u32 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Sheet {
    Upper,
    Middle,
    Lower,
}

impl Sheet {
    fn flipped(self) -> Self {
        match self {
            Sheet::Upper => Sheet::Lower,
            Sheet::Lower => Sheet::Upper,
            Sheet::Middle => Sheet::Middle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Ray { sheet: Sheet, ray: u32, k: u32 },
    Center(Sheet),
    Bite { sheet: Sheet, j: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum GlobalKey {
    Ray { sheet: Sheet, ray: u32, k: u32 },
    Center(Sheet),
    Local { element: u32, v: u32 },
}

#[derive(Default)]
struct Piece {
    pos: Vec<Vec3>,
    keys: Vec<Option<Key>>,
    sphere: Vec<bool>,
    faces: Vec<[u32; 3]>,
    labels: Vec<u32>,
    index: BTreeMap<Key, u32>,
}

impl Piece {
    fn vertex(&mut self, key: Option<Key>, pos: Vec3, on_sphere: bool) -> u32 {
        if let Some(k) = key {
            if let Some(&v) = self.index.get(&k) {
                return v;
            }
        }
        let v = self.pos.len() as u32;
        self.pos.push(pos);
        self.keys.push(key);
        self.sphere.push(on_sphere);
        if let Some(k) = key {
            self.index.insert(k, v);
        }
        v
    }

    fn tri(&mut self, f: [u32; 3], label: u32) {
        if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
            self.faces.push(f);
            self.labels.push(label);
        }
    }

    /// Emit quads of an `(rows+1) × (cols+1)` id grid, oriented so that the
    /// planar reference triangle has the requested sign.
    fn grid(&mut self, ids: &[Vec<u32>], label: u32, flip: bool) {
        for i in 0..ids.len() - 1 {
            for j in 0..ids[i].len() - 1 {
                let (a, b, c, d) = (ids[i][j], ids[i + 1][j], ids[i + 1][j + 1], ids[i][j + 1]);
                for f in [[a, b, c], [a, c, d]] {
                    self.tri(if flip { [f[0], f[2], f[1]] } else { f }, label);
                }
            }
        }
    }

    /// Direction in which some face of `label` traverses the edge `a → b`.
    fn traverses(&self, label: u32, a: u32, b: u32) -> Option<bool> {
        self.faces.iter().zip(&self.labels).find_map(|(f, &l)| {
            if l != label {
                return None;
            }
            (0..3).find_map(|i| {
                let (x, y) = (f[i], f[(i + 1) % 3]);
                if x == a && y == b {
                    Some(true)
                } else if x == b && y == a {
                    Some(false)
                } else {
                    None
                }
            })
        })
    }
}

#[inline]
fn lift(l: Vec3, z: f64) -> Vec3 {
    let c = libm::sqrt((1.0 - z * z).max(0.0));
    Vec3::new(c * l.x, c * l.y, z)
}

#[inline]
fn orient2d(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Geometry of one slice: heights and lens radii of the wall rows from the
/// middle sheet (`z = 0`) to the upper sheet (`z = a`), plus the retraction.
#[derive(Debug, Clone)]
pub(crate) struct SliceShape {
    pub a: f64,
    pub lambda: f64,
    /// `(z, b)` with `b` the lens radius in layout units.
    pub rows: Vec<(f64, f64)>,
}

struct Ctx {
    n: u32,
    counts: GridCounts,
    w0: Wedge,
    radii: Vec<f64>,
}

impl Ctx {
    fn new(n: u32, resolution: u32) -> Result<Self> {
        let per_wedge = resolution / (2 * n);
        if per_wedge < 8 {
            return Err(Error::Precondition(format!(
                "resolution {resolution} must be at least {}",
                16 * n
            )));
        }
        let counts = GridCounts::new(per_wedge);
        let w0 = Wedge::new(n, 0);
        let radii = ray_radii(&w0, &counts);
        Ok(Self {
            n,
            counts,
            w0,
            radii,
        })
    }

    fn ray_point(&self, ray: u32, k: u32) -> Vec3 {
        Vec3::polar(ray as f64 * PI / self.n as f64) * self.radii[k as usize]
    }

    /// Bitten wedge `W_0` of `sheet` at height `z`; returns the bite-arc ids.
    fn bitten(&self, piece: &mut Piece, sheet: Sheet, z: f64, b: f64, lambda: f64, up: bool) {
        let w = &self.w0;
        let c = &self.counts;
        let th = theta_grid(w, c, b);
        let wts = radial_weights(b, c);
        let nr = wts.len() - 1;
        let nt = c.n_theta;
        let label = if sheet == Sheet::Middle {
            labels::MIDDLE
        } else {
            labels::UPPER
        };
        let mut ids = vec![vec![0u32; nt as usize + 1]; nr + 1];
        let mut layout = vec![vec![Vec3::ZERO; nt as usize + 1]; nr + 1];
        for j in 0..=nt {
            let theta = th[j as usize];
            let end = j == 0 || j == nt;
            let l = if end { b } else { w.exit(theta) };
            let beta = if end {
                b
            } else {
                (1.0 - lambda) * b + lambda * l
            };
            for (i, &wi) in wts.iter().enumerate() {
                let outer = i == nr;
                let (key, mut p, sphere) = if end || i == 0 {
                    (Some(Key::Bite { sheet, j }), w.at(theta, beta), end)
                } else if outer {
                    match c.column_end(j) {
                        ColumnEnd::Arc => (None, w.at(theta, l), true),
                        ColumnEnd::Ray { side, k } => {
                            let key = if k == 0 {
                                Key::Center(sheet)
                            } else {
                                Key::Ray {
                                    sheet,
                                    ray: side,
                                    k,
                                }
                            };
                            (Some(key), self.ray_point(side, k), k == c.m_mid)
                        }
                    }
                } else {
                    (None, w.at(theta, beta + (l - beta) * wi), false)
                };
                if end {
                    p = w.at(theta, b);
                }
                layout[i][j as usize] = p;
                ids[i][j as usize] = piece.vertex(key, lift(p, z), sphere);
            }
        }
        let jm = (nt / 2) as usize;
        let s = orient2d(layout[0][jm], layout[1][jm], layout[1][jm + 1]);
        piece.grid(&ids, label, (s > 0.0) != up);
    }

    /// Full wedge `W_{-1}` of the upper sheet.
    fn full(&self, piece: &mut Piece, z: f64, b: f64, lambda: f64, sheet: Sheet) {
        let n = self.n;
        let wm = Wedge::new(n, -1);
        let kf = self.counts.n_full;
        let omega = PI / n as f64;
        let m = self.counts.m_mid as usize;
        let mut ids = vec![vec![0u32; kf as usize + 1]; m + 1];
        let mut layout = vec![vec![Vec3::ZERO; kf as usize + 1]; m + 1];
        for (k, row) in ids.iter_mut().enumerate() {
            for q in 0..=kf {
                let k32 = k as u32;
                let (key, p) = if k == 0 {
                    (Some(Key::Center(sheet)), Vec3::ZERO)
                } else if q == 0 {
                    (
                        Some(Key::Ray {
                            sheet,
                            ray: 2 * n - 1,
                            k: k32,
                        }),
                        self.ray_point(2 * n - 1, k32),
                    )
                } else if q == kf {
                    (
                        Some(Key::Ray {
                            sheet,
                            ray: 0,
                            k: k32,
                        }),
                        self.ray_point(0, k32),
                    )
                } else {
                    let phi = -omega + omega * q as f64 / kf as f64;
                    (
                        None,
                        wm.retract(Vec3::polar(phi) * self.radii[k], b, lambda),
                    )
                };
                layout[k][q as usize] = p;
                row[q as usize] = piece.vertex(key, lift(p, z), k == m);
            }
        }
        let s = orient2d(layout[1][0], layout[2][0], layout[2][1]);
        piece.grid(&ids, labels::UPPER, s < 0.0);
    }

    fn wall(&self, piece: &mut Piece, shape: &SliceShape) -> Result<()> {
        let w = &self.w0;
        let c = &self.counts;
        let nt = c.n_theta;
        let nz = shape.rows.len() - 1;
        let mut ids = Vec::with_capacity(nz + 1);
        for (l, &(z, b)) in shape.rows.iter().enumerate() {
            let th = theta_grid(w, c, b);
            let row: Vec<u32> = (0..=nt)
                .map(|j| {
                    let theta = th[j as usize];
                    let end = j == 0 || j == nt;
                    let beta = if end {
                        b
                    } else {
                        (1.0 - shape.lambda) * b + shape.lambda * w.exit(theta)
                    };
                    let key = if l == 0 {
                        Some(Key::Bite {
                            sheet: Sheet::Middle,
                            j,
                        })
                    } else if l == nz {
                        Some(Key::Bite {
                            sheet: Sheet::Upper,
                            j,
                        })
                    } else {
                        None
                    };
                    piece.vertex(key, lift(w.at(theta, beta), z), end)
                })
                .collect();
            ids.push(row);
        }
        let jm = (nt / 2) as usize;
        let (a, b) = (ids[0][jm], ids[0][jm + 1]);
        let middle = piece
            .traverses(labels::MIDDLE, a, b)
            .ok_or_else(|| Error::DegenerateSlice("bite arc missing from middle sheet".into()))?;
        // The quads traverse the bottom row backwards; match the middle sheet.
        piece.grid(&ids, labels::WALL, !middle);
        Ok(())
    }
}

struct Assembled {
    mesh: TriMesh,
}

#[allow(clippy::needless_range_loop)]
fn assemble(
    piece: &Piece,
    group: &DihedralGroup,
    elements: &[usize],
    with_perms: bool,
) -> Result<Assembled> {
    let n = group.n();
    let nv = piece.pos.len();
    let mut index: BTreeMap<GlobalKey, u32> = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut tags = Vec::new();
    let mut global = vec![vec![u32::MAX; nv]; group.order()];
    for &ei in elements {
        let e = group.element(ei);
        let m = group.matrix_at(ei);
        for v in 0..nv {
            let gk = match piece.keys[v] {
                Some(Key::Ray { sheet, ray, k }) => GlobalKey::Ray {
                    sheet: if e.flip { sheet.flipped() } else { sheet },
                    ray: group.ray_image(e, ray),
                    k,
                },
                Some(Key::Center(sheet)) => {
                    GlobalKey::Center(if e.flip { sheet.flipped() } else { sheet })
                }
                _ => GlobalKey::Local {
                    element: ei as u32,
                    v: v as u32,
                },
            };
            let id = *index.entry(gk).or_insert_with(|| {
                vertices.push(m.apply(piece.pos[v]));
                let axis = match gk {
                    GlobalKey::Center(_) => Some(0),
                    GlobalKey::Ray {
                        sheet: Sheet::Middle,
                        ray,
                        ..
                    } => Some(if ray % n == 0 { n } else { ray % n }),
                    _ => None,
                };
                tags.push(VertexTag {
                    on_sphere: piece.sphere[v],
                    axis,
                    domain: ei as u32,
                });
                vertices.len() as u32 - 1
            });
            global[ei][v] = id;
        }
    }
    let mut faces = Vec::with_capacity(piece.faces.len() * elements.len());
    let mut face_labels = Vec::with_capacity(faces.capacity());
    for &ei in elements {
        let e = group.element(ei);
        let g = &global[ei];
        for (f, &lab) in piece.faces.iter().zip(&piece.labels) {
            let [a, b, c] = [g[f[0] as usize], g[f[1] as usize], g[f[2] as usize]];
            faces.push(if e.flip { [a, c, b] } else { [a, b, c] });
            let lab = match (lab, e.flip) {
                (labels::UPPER, true) => labels::LOWER,
                (l, _) => l,
            };
            face_labels.push(lab);
        }
    }
    let mut mesh = TriMesh::new(vertices, faces)?;
    mesh.tags = tags;
    mesh.face_labels = face_labels;
    if with_perms {
        let total = mesh.vertices.len();
        let mut perms = Vec::with_capacity(group.order());
        for pi in 0..group.order() {
            let psi = group.element(pi);
            let mut perm = vec![u32::MAX; total];
            for ei in 0..group.order() {
                let target = group.index(group.compose(psi, group.element(ei)));
                for v in 0..nv {
                    perm[global[ei][v] as usize] = global[target][v];
                }
            }
            if perm.contains(&u32::MAX) {
                return Err(Error::Geometry("incomplete orbit permutation".into()));
            }
            perms.push(perm);
        }
        mesh.symmetry = Some(Symmetry { n, perms });
    }
    Ok(Assembled { mesh })
}

/// Uniform rows for a constant lens radius `r3` in 3D.
fn uniform_rows(a: f64, r3: f64, nz: u32) -> Vec<(f64, f64)> {
    (0..=nz)
        .map(|l| {
            let z = if l == nz { a } else { a * l as f64 / nz as f64 };
            (z, r3 / libm::sqrt(1.0 - z * z))
        })
        .collect()
}

/// Rows on the catenoid `ρ(z) = r·cosh(sz)/cosh(s·t0)`, spaced by arclength
/// of the profile normalised to the unit square.
fn catenoid_rows(r: f64, t0: f64, s: f64, nz: u32) -> Result<Vec<(f64, f64)>> {
    let a = s * t0;
    let shape = |zn: f64| -> f64 {
        if a < 1e-8 {
            zn * zn
        } else {
            let q = libm::exp(0.5 * a * (zn - 1.0)) * libm::expm1(-a * zn) / libm::expm1(-a);
            q * q
        }
    };
    let dense = 4096;
    let mut cum = Vec::with_capacity(dense + 1);
    cum.push(0.0);
    let mut prev = (0.0, shape(0.0));
    for i in 1..=dense {
        let zn = i as f64 / dense as f64;
        let cur = (zn, shape(zn));
        let d = libm::hypot(cur.0 - prev.0, cur.1 - prev.1);
        cum.push(cum[i - 1] + d);
        prev = cur;
    }
    let total = cum[dense];
    let mut rows = Vec::with_capacity(nz as usize + 1);
    let mut seg = 0;
    for l in 0..=nz {
        let zn = if l == 0 {
            0.0
        } else if l == nz {
            1.0
        } else {
            let target = total * l as f64 / nz as f64;
            while cum[seg + 1] < target {
                seg += 1;
            }
            let f = (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
            (seg as f64 + f) / dense as f64
        };
        let z = t0 * zn;
        let rho = crate::catenoid::profile(r, t0, s, z)?;
        rows.push((z, rho / libm::sqrt(1.0 - z * z)));
    }
    Ok(rows)
}

pub(crate) fn slice_shape(
    schedule: &SweepoutSchedule,
    t: f64,
    stage: Stage,
    nz: u32,
) -> Result<SliceShape> {
    let t0 = schedule.t0;
    Ok(match stage {
        Stage::Ribbons => {
            // Rows equally spaced in latitude along the sphere.
            let eps = schedule.eps(t);
            let top = libm::asin(t);
            let rows = (0..=nz)
                .map(|l| {
                    (
                        if l == nz {
                            t
                        } else {
                            libm::sin(top * l as f64 / nz as f64)
                        },
                        eps,
                    )
                })
                .collect();
            SliceShape {
                a: t,
                lambda: 0.0,
                rows,
            }
        }
        Stage::Replacement => SliceShape {
            a: t0,
            lambda: 0.0,
            rows: catenoid_rows(schedule.r, t0, schedule.neck_parameter(t), nz)?,
        },
        Stage::Widening => SliceShape {
            a: t0,
            lambda: 0.0,
            rows: uniform_rows(t0, schedule.widening_radius(t), nz),
        },
        Stage::Retraction => SliceShape {
            a: 4.0 * t,
            lambda: schedule.retraction(t),
            rows: uniform_rows(4.0 * t, schedule.widen_to, nz),
        },
    })
}

/// Mesh of the slice `Σ_t` for `t ∈ (0, 1)` with about `resolution`
/// segments along the unit circle, carrying the `D_{g+1}` permutations.
pub fn build_slice(schedule: &SweepoutSchedule, t: f64, resolution: u32) -> Result<TriMesh> {
    let stage = schedule.stage(t)?;
    build_slice_in(schedule, t, stage, resolution)
}

/// As [`build_slice`] but with the stage forced, so stage boundaries can be
/// approached from either side.
pub fn build_slice_in(
    schedule: &SweepoutSchedule,
    t: f64,
    stage: Stage,
    resolution: u32,
) -> Result<TriMesh> {
    schedule.validate()?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::DegenerateSlice(format!("t = {t} is not in (0, 1)")));
    }
    let n = schedule.n();
    let ctx = Ctx::new(n, resolution)?;
    let shape = slice_shape(schedule, t, stage, ctx.counts.n_z)?;
    let group = DihedralGroup::new(n)?;
    let mut piece = Piece::default();
    let b_mid = shape.rows[0].1;
    let b_up = shape.rows[shape.rows.len() - 1].1;
    if !(b_mid > 0.0 && b_up > 0.0 && b_mid < 1.0 && b_up < 1.0) {
        return Err(Error::DegenerateSlice(format!(
            "lens radii {b_mid}, {b_up} out of range"
        )));
    }
    ctx.bitten(&mut piece, Sheet::Middle, 0.0, b_mid, shape.lambda, false);
    ctx.bitten(&mut piece, Sheet::Upper, shape.a, b_up, shape.lambda, true);
    ctx.full(&mut piece, shape.a, b_up, shape.lambda, Sheet::Upper);
    ctx.wall(&mut piece, &shape)?;
    let all: Vec<usize> = (0..group.order()).collect();
    Ok(assemble(&piece, &group, &all, true)?.mesh)
}

/// The flat disc with lens bites of radius `eps` around the anchors
/// `p^+` (`sign > 0`) or `p^-` (`sign < 0`).
pub fn punctured_disc_mesh(g: u32, eps: f64, sign: i32, resolution: u32) -> Result<TriMesh> {
    if g == 0 {
        return Err(Error::InvalidOrder(1));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    let n = g + 1;
    let ctx = Ctx::new(n, resolution)?;
    let group = DihedralGroup::new(n)?;
    let mut piece = Piece::default();
    ctx.bitten(&mut piece, Sheet::Upper, 0.0, eps, 0.0, true);
    ctx.full(&mut piece, 0.0, eps, 0.0, Sheet::Upper);
    let rotations: Vec<usize> = (0..n as usize).collect();
    let mut mesh = assemble(&piece, &group, &rotations, false)?.mesh;
    if sign < 0 {
        let f = *group.matrix(crate::GroupElement { rot: 0, flip: true });
        for v in &mut mesh.vertices {
            *v = f.apply(*v);
        }
        for f in &mut mesh.faces {
            f.swap(1, 2);
        }
    }
    Ok(mesh)
}

/// Endpoint slices: `Σ_0` is the unit disc, `Σ_1` the disc together with
/// arcs from each anchor to the pole on its side.
#[derive(Debug, Clone)]
pub struct EndpointSlice {
    pub disc: TriMesh,
    pub arcs: Vec<Vec<Vec3>>,
}

pub fn endpoint_slice(t: f64, g: u32, resolution: u32) -> Result<EndpointSlice> {
    if g == 0 {
        return Err(Error::InvalidOrder(1));
    }
    let n = g + 1;
    let seg = (resolution / (2 * n)).max(4) * 2 * n;
    let disc = TriMesh::equivariant_disc(n, seg, (seg / 8).max(4))?;
    let arcs = if t == 0.0 {
        Vec::new()
    } else if t == 1.0 {
        let m = (seg / 4).max(8);
        (0..2 * n)
            .map(|j| {
                let p = Vec3::polar((j as f64 + 0.5) * PI / n as f64);
                let pole = if j % 2 == 0 { Vec3::Z } else { -Vec3::Z };
                (0..=m)
                    .map(|i| {
                        let phi = 0.5 * PI * i as f64 / m as f64;
                        p * libm::cos(phi) + pole * libm::sin(phi)
                    })
                    .collect()
            })
            .collect()
    } else {
        return Err(Error::Domain(format!(
            "endpoint slices exist at t = 0 and t = 1, not {t}"
        )));
    };
    Ok(EndpointSlice { disc, arcs })
}
