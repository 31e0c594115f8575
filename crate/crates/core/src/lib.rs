//! Free boundary minimal surface workbench for the unit ball.
//!
//! Builds dihedrally symmetric sweepouts of `B³` by surfaces with one
//! boundary curve and genus `g`, certifies slice areas against analytic
//! bounds, audits the width bracket `π < W < 3π`, and runs an equivariant
//! discrete area descent.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and thread pools live in the `fbms` companion crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catenoid;
pub mod error;
pub mod geom;
pub mod minimize;
pub mod rng;
pub mod sweepout;
pub mod width;

pub use error::{Error, Result};
pub use geom::{DihedralGroup, GroupElement, Isometry, TriMesh, Vec3};
