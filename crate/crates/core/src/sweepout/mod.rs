//! Dihedrally symmetric sweepouts of the ball by genus-`g` surfaces with
//! one boundary curve.
//!
//! For `t` near `1` a slice is the disc `{z = 0}` together with two small
//! caps at heights `±t`, with lens-shaped bites taken out around the anchor
//! points on the unit circle and `2(g+1)` ribbons joining the bites. As `t`
//! decreases the ribbons become catenoidal necks, the necks widen into
//! cylinders, and finally the sheets retract onto the disc.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geom::Vec3;
use crate::{Error, Result};

pub mod bounds;
pub mod builder;
pub mod certify;
mod layout;
mod schedule;

pub use bounds::{
    applicable_bound, bound_deficit_in, replacement_stage_bound, ribbon_area_bound,
    slice_area_bound, slice_bound_excess, widening_bound,
};
pub use builder::{
    build_slice, build_slice_in, endpoint_slice, punctured_disc_mesh, EndpointSlice,
};
pub use certify::{
    certify_slice, certify_slice_in, certify_sweep, mesh_tolerance, stage_jumps, sweep_grid,
    SliceCertificate, StageJump, SweepReport,
};
pub use schedule::{default_schedule, r_bar, EpsProfile, Stage, SweepoutSchedule};

/// Anchor points `p_k^+` at angle `(2k + ½)π/(g+1)` and `p_k^-` at
/// `(2k + 3/2)π/(g+1)`, `k = 0..g`.
///
/// `p^+` sits in the middle of the even wedges and `p^-` in the odd ones;
/// the ribbons at `p^+` run upward and those at `p^-` downward.
pub fn anchor_points(g: u32) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    if g == 0 {
        return Err(Error::InvalidOrder(1));
    }
    let n = (g + 1) as f64;
    let at = |j: u32| Vec3::polar((j as f64 + 0.5) * PI / n);
    Ok((
        (0..=g).map(|k| at(2 * k)).collect(),
        (0..=g).map(|k| at(2 * k + 1)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::DihedralGroup;

    #[test]
    fn anchors_for_genus_one() {
        let (p, m) = anchor_points(1).unwrap();
        let s = libm::sqrt(0.5);
        let close = |a: Vec3, x: f64, y: f64| (a.x - x).abs() < 1e-15 && (a.y - y).abs() < 1e-15;
        assert!(close(p[0], s, s) && close(p[1], -s, -s));
        assert!(close(m[0], -s, s) && close(m[1], s, -s));
    }

    #[test]
    fn psi_swaps_anchor_signs() {
        for g in 1..6 {
            let grp = DihedralGroup::for_genus(g).unwrap();
            let (p, m) = anchor_points(g).unwrap();
            for q in &p {
                let img = grp.apply(grp.psi(), *q);
                assert!(m.iter().any(|x| (*x - img).norm() < 1e-12));
            }
        }
    }
}
