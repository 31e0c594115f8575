use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Isometry, Vec3};
use crate::{Error, Result};

/// Element `R^rot ∘ F^flip` of the dihedral group `D_n`.
///
/// `R` rotates by `2π/n` about the z-axis and `F` is the half turn about
/// the x-axis. `R^k ∘ F` is the half turn about the horizontal line at
/// polar angle `kπ/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub rot: u32,
    pub flip: bool,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        rot: 0,
        flip: false,
    };
}

/// The group `D_n` of order `2n` generated by rotations about `ξ_0` (the
/// z-axis) and half turns about the horizontal axes `ξ_1, …, ξ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DihedralGroup {
    n: u32,
    matrices: Vec<Isometry>,
}

impl DihedralGroup {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidOrder(n));
        }
        let matrices = (0..2 * n)
            .map(|i| {
                let e = Self::element_of(n, i as usize);
                let rot = Isometry::rotation_z(2.0 * PI * e.rot as f64 / n as f64);
                if e.flip {
                    rot.compose(&Isometry::half_turn_horizontal(0.0))
                } else {
                    rot
                }
            })
            .collect();
        Ok(Self { n, matrices })
    }

    /// The group `D_{g+1}` attached to genus `g`.
    pub fn for_genus(g: u32) -> Result<Self> {
        Self::new(g + 1)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> usize {
        2 * self.n as usize
    }

    fn element_of(n: u32, index: usize) -> GroupElement {
        let i = index as u32;
        GroupElement {
            rot: i % n,
            flip: i >= n,
        }
    }

    /// Elements are indexed rotations first: `0..n` is the cyclic subgroup.
    pub fn element(&self, index: usize) -> GroupElement {
        Self::element_of(self.n, index)
    }

    pub fn index(&self, e: GroupElement) -> usize {
        (e.rot % self.n + if e.flip { self.n } else { 0 }) as usize
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order()).map(|i| self.element(i))
    }

    pub fn matrix(&self, e: GroupElement) -> &Isometry {
        &self.matrices[self.index(e)]
    }

    pub fn matrix_at(&self, index: usize) -> &Isometry {
        &self.matrices[index]
    }

    pub fn apply(&self, e: GroupElement, v: Vec3) -> Vec3 {
        self.matrix(e).apply(v)
    }

    /// `a ∘ b`.
    pub fn compose(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        let n = self.n;
        let rot = if a.flip {
            (a.rot + n - b.rot % n) % n
        } else {
            (a.rot + b.rot) % n
        };
        GroupElement {
            rot,
            flip: a.flip ^ b.flip,
        }
    }

    pub fn inverse(&self, e: GroupElement) -> GroupElement {
        if e.flip {
            e
        } else {
            GroupElement {
                rot: (self.n - e.rot % self.n) % self.n,
                flip: false,
            }
        }
    }

    /// Direction of the axis `ξ_k`: `ξ_0` is the z-axis, `ξ_k` for
    /// `1 ≤ k ≤ n` is the horizontal line at polar angle `kπ/n`.
    pub fn axis(&self, k: u32) -> Vec3 {
        if k == 0 {
            Vec3::Z
        } else {
            Vec3::polar(k as f64 * PI / self.n as f64)
        }
    }

    /// The half turn about `ξ_k`, `1 ≤ k ≤ n`.
    pub fn half_turn(&self, k: u32) -> GroupElement {
        GroupElement {
            rot: k % self.n,
            flip: true,
        }
    }

    /// The half turn about `ξ_1`, which swaps the two sides of every
    /// slice of the sweepout.
    pub fn psi(&self) -> GroupElement {
        self.half_turn(1)
    }

    /// Image of horizontal ray `ρ` (polar angle `ρπ/n`, `0 ≤ ρ < 2n`).
    pub fn ray_image(&self, e: GroupElement, ray: u32) -> u32 {
        let m = 2 * self.n;
        let r = ray % m;
        if e.flip {
            (2 * e.rot + m - r) % m
        } else {
            (2 * e.rot + r) % m
        }
    }

    /// Image of the wedge `W_j` between rays `j` and `j + 1`.
    pub fn wedge_image(&self, e: GroupElement, wedge: u32) -> u32 {
        let m = 2 * self.n;
        let w = wedge % m;
        if e.flip {
            (2 * e.rot + 2 * m - w - 1) % m
        } else {
            (2 * e.rot + w) % m
        }
    }
}
