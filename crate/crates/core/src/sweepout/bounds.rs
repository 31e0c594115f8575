//! Analytic area bounds for the slices of each stage.

use alloc::format;
use core::f64::consts::PI;

use super::{Stage, SweepoutSchedule};
use crate::{Error, Result};

/// `3π − 2π(t² − (g+1)εt)`: three sheets plus `2(g+1)` ribbons.
pub fn slice_area_bound(g: u32, t: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) || !(eps >= 0.0) {
        return Err(Error::Domain(format!(
            "need t ∈ [0, 1], eps >= 0, got t = {t}, eps = {eps}"
        )));
    }
    let n = g as f64 + 1.0;
    Ok(3.0 * PI - 2.0 * PI * (t * t - n * eps * t))
}

/// `slice_area_bound − 3π`, without the cancellation that hides it when
/// `t` is tiny.
pub fn slice_bound_excess(g: u32, t: f64, eps: f64) -> Result<f64> {
    slice_area_bound(g, t, eps)?;
    let n = g as f64 + 1.0;
    Ok(2.0 * PI * t * (n * eps - t))
}

/// `πεt`: area of one ribbon swept over heights `[0, t]`.
pub fn ribbon_area_bound(eps: f64, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) || !(eps >= 0.0) {
        return Err(Error::Domain(format!(
            "need t ∈ [0, 1], eps >= 0, got t = {t}, eps = {eps}"
        )));
    }
    Ok(PI * eps * t)
}

/// `(3 − t0²)π + (g+1)·4πt0²/(−log t0)`: replacement by catenoidal necks.
pub fn replacement_stage_bound(g: u32, t0: f64) -> Result<f64> {
    let n = g as f64 + 1.0;
    if !(t0 > 0.0 && -libm::log(t0) > 8.0 * n) {
        return Err(Error::Precondition(format!(
            "need -log t0 > 8(g+1), got t0 = {t0}"
        )));
    }
    Ok((3.0 - t0 * t0) * PI + n * 4.0 * PI * t0 * t0 / (-libm::log(t0)))
}

/// `3π − (g+1)π(r² − 4rt0)`: cylindrical necks of radius `r`.
pub fn widening_bound(g: u32, r: f64, t0: f64) -> Result<f64> {
    let n = g as f64 + 1.0;
    if !(t0 > 0.0 && -libm::log(t0) > 8.0 * n) {
        return Err(Error::Precondition(format!(
            "need -log t0 > 8(g+1), got t0 = {t0}"
        )));
    }
    if !(r >= 5.0 * t0) {
        return Err(Error::Precondition(format!(
            "need r >= 5·t0, got r = {r}, t0 = {t0}"
        )));
    }
    Ok(3.0 * PI - n * PI * (r * r - 4.0 * r * t0))
}

/// The bound that applies to the slice at `t`, with its stage.
pub fn applicable_bound(schedule: &SweepoutSchedule, t: f64) -> Result<(Stage, f64)> {
    let stage = schedule.stage(t)?;
    applicable_bound_in(schedule, t, stage).map(|b| (stage, b))
}

pub(crate) fn applicable_bound_in(
    schedule: &SweepoutSchedule,
    t: f64,
    stage: Stage,
) -> Result<f64> {
    let g = schedule.g;
    match stage {
        Stage::Ribbons => slice_area_bound(g, t, schedule.eps(t)),
        Stage::Replacement => replacement_stage_bound(g, schedule.t0),
        Stage::Widening => widening_bound(g, schedule.widening_radius(t), schedule.t0),
        Stage::Retraction => widening_bound(g, schedule.widen_to, schedule.t0),
    }
}

/// `3π − bound` for the bound that applies at `t` in `stage`, evaluated
/// without cancellation. Positive means the bound is below `3π`.
pub fn bound_deficit_in(schedule: &SweepoutSchedule, t: f64, stage: Stage) -> Result<f64> {
    applicable_bound_in(schedule, t, stage)?;
    let n = schedule.n() as f64;
    let t0 = schedule.t0;
    Ok(match stage {
        Stage::Ribbons => -slice_bound_excess(schedule.g, t, schedule.eps(t))?,
        Stage::Replacement => PI * t0 * t0 * (1.0 - 4.0 * n / (-libm::log(t0))),
        Stage::Widening | Stage::Retraction => {
            let r = if stage == Stage::Widening {
                schedule.widening_radius(t)
            } else {
                schedule.widen_to
            };
            n * PI * r * (r - 4.0 * t0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((slice_area_bound(3, 1.0, 0.0).unwrap() - PI).abs() < 1e-15);
        assert!((ribbon_area_bound(0.01, 0.5).unwrap() - 0.005 * PI).abs() < 1e-17);
        assert_eq!(ribbon_area_bound(0.3, 0.0).unwrap(), 0.0);
        let t0 = libm::exp(-25.0);
        // The excess over (3 − t0²)π is 12/25 of t0²π, so the bound is below 3π.
        assert!(replacement_stage_bound(2, t0).unwrap() <= 3.0 * PI);
        for g in 1..6 {
            let t0 = libm::exp(-(8.0 * (g as f64 + 1.0) + 1.0));
            let w = widening_bound(g, 5.0 * t0, t0).unwrap();
            let expect = 3.0 * PI - 5.0 * (g as f64 + 1.0) * PI * t0 * t0;
            assert!((w - expect).abs() < 1e-15);
            assert!(w <= 3.0 * PI);
        }
    }

    #[test]
    fn overlarge_bite_breaks_the_bound() {
        for g in 1..=5 {
            let t0 = 1e-3;
            let eps = 2.0 * t0 / (g as f64 + 1.0);
            let b = slice_area_bound(g, t0, eps).unwrap();
            assert!((b - (3.0 * PI + 2.0 * PI * t0 * t0)).abs() < 1e-15);
            assert!(b > 3.0 * PI);
        }
    }

    #[test]
    fn deficits_match_direct_subtraction() {
        let s = SweepoutSchedule::with_parameters(1, 0.5, 1e-8).unwrap();
        for (t, st) in [
            (0.5, Stage::Ribbons),
            (0.7e-8, Stage::Replacement),
            (0.3e-8, Stage::Widening),
            (1e-9, Stage::Retraction),
        ] {
            let d = bound_deficit_in(&s, t, st).unwrap();
            let direct = 3.0 * PI - applicable_bound_in(&s, t, st).unwrap();
            assert!(
                (d - direct).abs() <= 1e-14 + 1e-9 * d.abs(),
                "{st:?}: {d} vs {direct}"
            );
            assert!(d > 0.0);
        }
    }

    #[test]
    fn preconditions() {
        assert!(replacement_stage_bound(2, libm::exp(-23.0)).is_err());
        assert!(widening_bound(1, 4.0 * 1e-9, 1e-9).is_err());
    }
}
