//! Half-balls, volume bisection and the width bracket `π < W < 3π`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geom::topology::edges;
use crate::geom::{DihedralGroup, TriMesh, Vec3};
use crate::rng::{self, streams};
use crate::sweepout::{SliceCertificate, SweepReport};
use crate::{Error, Result};

mod side;

pub use side::SideField;

/// `{x ∈ B³ : x·normal ≥ 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HalfBall {
    pub normal: Vec3,
}

impl HalfBall {
    pub fn new(normal: Vec3) -> Result<Self> {
        let normal = normal
            .normalized()
            .ok_or_else(|| Error::Domain("half-ball normal must be nonzero".into()))?;
        Ok(Self { normal })
    }

    #[inline]
    pub fn contains(&self, x: Vec3) -> bool {
        x.dot(self.normal) >= 0.0
    }

    /// Whether every group element maps the half-ball to itself or to its
    /// complement, judged on `samples` random points.
    pub fn is_equivariant(&self, group: &DihedralGroup, samples: usize, seed: u64) -> bool {
        let mut r = rng::stream(seed, streams::PERTURBATION);
        let pts: Vec<Vec3> = (0..samples).map(|_| rng::in_ball(&mut r)).collect();
        (0..group.order()).all(|i| {
            let inv = group.matrix_at(group.index(group.inverse(group.element(i))));
            let same = pts
                .iter()
                .all(|&x| self.contains(inv.apply(x)) == self.contains(x));
            let swapped = pts
                .iter()
                .all(|&x| self.contains(inv.apply(x)) != self.contains(x));
            same || swapped
        })
    }
}

/// The `D_n`-equivariant half-balls: upper and lower for every `n`, and for
/// `n = 2` also the four bounded by the vertical planes through `ξ_1` and
/// through `ξ_2`.
pub fn equivariant_half_balls(n: u32) -> Result<Vec<HalfBall>> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    let mut out = vec![HalfBall { normal: Vec3::Z }, HalfBall { normal: -Vec3::Z }];
    if n == 2 {
        for v in [Vec3::X, -Vec3::X, Vec3::Y, -Vec3::Y] {
            out.push(HalfBall { normal: v });
        }
    }
    Ok(out)
}

/// Fraction of checked samples whose cached label disagrees with the
/// reference rays above which the estimate is rejected.
const MAX_DISAGREEMENT: f64 = 1e-3;

/// Every this many samples the cached label is checked against the
/// reference rays.
const CHECK_EVERY: u64 = 256;

/// Counts from one chunk of volume samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VolumeCounts {
    pub samples: u64,
    pub inside: u64,
    pub checked: u64,
    pub disagreements: u64,
}

impl VolumeCounts {
    pub fn merge(self, o: Self) -> Self {
        Self {
            samples: self.samples + o.samples,
            inside: self.inside + o.inside,
            checked: self.checked + o.checked,
            disagreements: self.disagreements + o.disagreements,
        }
    }
}

/// Samples per chunk; each chunk has its own random stream.
pub const VOLUME_CHUNK: u64 = 1 << 14;

/// Sample chunk `chunk` of `count` points.
pub fn volume_chunk(field: &SideField, seed: u64, chunk: u64, count: u64) -> VolumeCounts {
    let mut r = rng::stream(seed, (streams::VOLUME_SAMPLES << 32) | chunk);
    let mut c = VolumeCounts::default();
    for i in 0..count {
        let x = rng::in_ball(&mut r);
        let inside = field.inside(x);
        c.samples += 1;
        c.inside += inside as u64;
        if i % CHECK_EVERY == 0 {
            let (ray, agreed) = field.ray_label(x);
            c.checked += 1;
            c.disagreements += (ray != inside || !agreed) as u64;
        }
    }
    c
}

/// Monte Carlo half-volume estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VolumeEstimate {
    pub samples: u64,
    pub volume: f64,
    /// `|volume − 2π/3|`.
    pub residual: f64,
    /// `(4π/3)·√(p(1−p)/N)`.
    pub sigma: f64,
    pub disagreement_rate: f64,
}

impl VolumeEstimate {
    pub fn from_counts(c: VolumeCounts) -> Result<Self> {
        if c.samples == 0 {
            return Err(Error::Domain("no samples".into()));
        }
        let n = c.samples as f64;
        let rate = c.disagreements as f64 / c.checked.max(1) as f64;
        if rate > MAX_DISAGREEMENT {
            return Err(Error::Geometry(format!(
                "side labels inconsistent on {:.3}% of checked samples; surface does not separate the ball",
                100.0 * rate
            )));
        }
        let p = c.inside as f64 / n;
        let ball = 4.0 * PI / 3.0;
        let volume = ball * p;
        Ok(Self {
            samples: c.samples,
            volume,
            residual: (volume - 0.5 * ball).abs(),
            sigma: ball * libm::sqrt(p * (1.0 - p) / n),
            disagreement_rate: rate,
        })
    }

    pub fn within(&self, k: f64) -> bool {
        self.residual <= k * self.sigma
    }
}

/// `|vol(F) − 2π/3|` from `samples` points, serially.
pub fn half_volume_residual(mesh: &TriMesh, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    let field = SideField::new(mesh, seed)?;
    let chunks = samples.div_ceil(VOLUME_CHUNK);
    let total = (0..chunks)
        .map(|i| {
            volume_chunk(
                &field,
                seed,
                i,
                VOLUME_CHUNK.min(samples - i * VOLUME_CHUNK),
            )
        })
        .fold(VolumeCounts::default(), VolumeCounts::merge);
    VolumeEstimate::from_counts(total)
}

/// Result of testing `ψ(F) = B³ ∖ F` on a point sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComplementCheck {
    pub samples: u64,
    pub tested: u64,
    pub mismatches: u64,
    pub band: f64,
}

impl ComplementCheck {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.tested > 0
    }
}

/// Depth of the shell between the sphere and the boundary chords, where the
/// two sides of a polygonal boundary meet.
pub fn boundary_shell(mesh: &TriMesh) -> Result<f64> {
    Ok(edges(mesh)?
        .iter()
        .filter(|e| e.is_boundary())
        .map(|e| 1.0 - ((mesh.vertices[e.a as usize] + mesh.vertices[e.b as usize]) * 0.5).norm())
        .fold(0.0, f64::max))
}

/// Test that `ψ`, the half turn about `ξ_1`, swaps the sides of the mesh
/// on `samples` random points, skipping points within `band` of the mesh
/// and points in the boundary shell.
pub fn complement_symmetry_report(
    mesh: &TriMesh,
    g: u32,
    samples: u64,
    band: f64,
    seed: u64,
) -> Result<ComplementCheck> {
    complement_symmetry_report_with(&SideField::new(mesh, seed)?, mesh, g, samples, band, seed)
}

/// [`complement_symmetry_report`] on a side field already built for `mesh`.
pub fn complement_symmetry_report_with(
    field: &SideField,
    mesh: &TriMesh,
    g: u32,
    samples: u64,
    band: f64,
    seed: u64,
) -> Result<ComplementCheck> {
    let group = DihedralGroup::for_genus(g)?;
    let psi = *group.matrix(group.psi());
    let shell = 1.0 - boundary_shell(mesh)?;
    let mut r = rng::stream(seed, streams::COMPLEMENT_SAMPLES);
    let mut out = ComplementCheck {
        samples,
        tested: 0,
        mismatches: 0,
        band,
    };
    for _ in 0..samples {
        let x = rng::in_ball(&mut r);
        let y = psi.apply(x);
        if x.norm() > shell - band || field.near_surface(x, band) || field.near_surface(y, band) {
            continue;
        }
        out.tested += 1;
        if field.inside(x) == field.inside(y) {
            out.mismatches += 1;
        }
    }
    Ok(out)
}

/// [`complement_symmetry_report`] with `N = 10⁵` and a `1e-9` band.
pub fn complement_symmetry_check(mesh: &TriMesh, g: u32) -> bool {
    complement_symmetry_report(mesh, g, 100_000, 1e-9, 0)
        .map(|c| c.passed())
        .unwrap_or(false)
}

/// `π < W < 3π`, with the upper end backed by certified slices.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WidthBracket {
    pub g: u32,
    pub grid_size: usize,
    /// `π`, the least area of a free boundary minimal surface in the ball.
    pub lower: f64,
    pub upper: f64,
    /// `3π − upper`, free of cancellation.
    pub margin: f64,
    /// Parameter of the slice attaining `upper`.
    pub argmax_t: f64,
}

/// Per-slice upper bound `3π − d` with `d` the larger of the measured
/// deficit `3π − (area + tolerance)` and the analytic one.
fn certified_deficit(c: &SliceCertificate) -> f64 {
    (3.0 * PI - (c.area + c.mesh_tolerance)).max(c.bound_deficit)
}

pub fn width_bracket(g: u32, sweep: &SweepReport) -> Result<WidthBracket> {
    if sweep.slices.is_empty() {
        return Err(Error::Domain("empty sweep".into()));
    }
    if sweep.schedule.g != g {
        return Err(Error::Domain(format!(
            "sweep is for g = {}, not {g}",
            sweep.schedule.g
        )));
    }
    let mut margin = f64::INFINITY;
    let mut argmax_t = 0.0;
    for c in &sweep.slices {
        if !(c.area < 3.0 * PI) {
            return Err(Error::BracketViolation { upper: c.area });
        }
        let d = certified_deficit(c);
        if d < margin {
            margin = d;
            argmax_t = c.t;
        }
    }
    let upper = 3.0 * PI - margin;
    if !(margin > 0.0) {
        return Err(Error::BracketViolation { upper });
    }
    Ok(WidthBracket {
        g,
        grid_size: sweep.slices.len(),
        lower: PI,
        upper,
        margin,
        argmax_t,
    })
}
