use alloc::format;
use core::f64::consts::PI;

use crate::{Error, Result};

/// Shape of the bite radius `ε(t)` on `[t0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EpsProfile {
    /// `ε0·(1−t)/(1−t0)`.
    Linear,
    /// `ε0·((1−t)/(1−t0))^p`, `p > 0`.
    Power(f64),
}

/// The four stages of the sweepout, by decreasing `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Stage {
    /// `t ∈ [t0, 1)`: three sheets joined by ribbons.
    Ribbons = 1,
    /// `t ∈ [t0/2, t0)`: ribbons replaced by catenoidal necks.
    Replacement = 2,
    /// `t ∈ [t0/4, t0/2)`: cylindrical necks widen.
    Widening = 3,
    /// `t ∈ (0, t0/4)`: the necks open up and the sheets collapse onto the disc.
    Retraction = 4,
}

impl Stage {
    pub fn number(self) -> u32 {
        self as u32
    }
}

/// Parameters of the sweepout for genus `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepoutSchedule {
    pub g: u32,
    /// Neck radius used from the replacement stage on.
    pub r: f64,
    pub h: f64,
    pub t0: f64,
    pub eps0: f64,
    pub eps_profile: EpsProfile,
    /// Neck radius at the end of widening; strictly between `r` and `r̄`.
    pub widen_to: f64,
}

/// `r̄ = sin(π/(2g+2))`: distance from an anchor point to the nearest axis.
pub fn r_bar(g: u32) -> f64 {
    libm::sin(PI / (2.0 * (g as f64 + 1.0)))
}

impl SweepoutSchedule {
    /// Schedule with the given `r` and `h`; `t0 = h`, `ε0 = t0/(2(g+1))`.
    pub fn with_parameters(g: u32, r: f64, h: f64) -> Result<Self> {
        if g == 0 {
            return Err(Error::InvalidSchedule("g must be >= 1".into()));
        }
        let n = g as f64 + 1.0;
        let s = Self {
            g,
            r,
            h,
            t0: h,
            eps0: h / (2.0 * n),
            eps_profile: EpsProfile::Linear,
            widen_to: 0.5 * (r + r_bar(g)),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn n(&self) -> u32 {
        self.g + 1
    }

    pub fn r_bar(&self) -> f64 {
        r_bar(self.g)
    }

    /// Check every schedule invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.n() as f64;
        let rb = self.r_bar();
        let bad = |m: alloc::string::String| Err(Error::InvalidSchedule(m));
        if self.g == 0 {
            return bad("g must be >= 1".into());
        }
        if !(self.r > 0.0 && self.r < rb) {
            return bad(format!("need 0 < r < sin(π/(2g+2)) = {rb}, got {}", self.r));
        }
        if !(self.h > 0.0 && self.h < self.r / 5.0) {
            return bad(format!("need 0 < h < r/5, got h = {}", self.h));
        }
        if !(-libm::log(self.h) > 8.0 * n) {
            return bad(format!("need -log h > 8(g+1), got {}", -libm::log(self.h)));
        }
        if self.t0 != self.h {
            return bad(format!("need t0 = h, got t0 = {}, h = {}", self.t0, self.h));
        }
        if (self.eps0 - self.t0 / (2.0 * n)).abs() > 1e-15 * self.eps0 {
            return bad(format!("need eps0 = t0/(2(g+1)), got {}", self.eps0));
        }
        if !(self.widen_to > self.r && self.widen_to < rb) {
            return bad(format!("need r < widen_to < r̄, got {}", self.widen_to));
        }
        if let EpsProfile::Power(p) = self.eps_profile {
            if !(p > 0.0 && p.is_finite()) {
                return bad(format!("eps profile exponent {p} must be positive"));
            }
        }
        Ok(())
    }

    /// `ε(t)` for `t ∈ [t0, 1)`, clamped to stay positive.
    pub fn eps(&self, t: f64) -> f64 {
        let x = ((1.0 - t) / (1.0 - self.t0)).clamp(0.0, 1.0);
        let v = match self.eps_profile {
            EpsProfile::Linear => self.eps0 * x,
            EpsProfile::Power(p) => self.eps0 * libm::pow(x, p),
        };
        v.max(f64::MIN_POSITIVE)
    }

    pub fn stage(&self, t: f64) -> Result<Stage> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::DegenerateSlice(format!(
                "t = {t} is not in (0, 1); use endpoint_slice"
            )));
        }
        Ok(if t >= self.t0 {
            Stage::Ribbons
        } else if t >= 0.5 * self.t0 {
            Stage::Replacement
        } else if t >= 0.25 * self.t0 {
            Stage::Widening
        } else {
            Stage::Retraction
        })
    }

    /// Neck parameter at the start of replacement: `r/cosh(s0·t0) = ε(t0)`.
    pub fn s0(&self) -> f64 {
        libm::acosh(self.r / self.eps(self.t0)) / self.t0
    }

    /// Catenoid parameter during replacement, from `s0` at `t0` to `0` at `t0/2`.
    pub fn neck_parameter(&self, t: f64) -> f64 {
        let x = ((t - 0.5 * self.t0) / (0.5 * self.t0)).clamp(0.0, 1.0);
        self.s0() * x
    }

    /// Cylinder radius during widening, from `r` at `t0/2` to `widen_to` at `t0/4`.
    pub fn widening_radius(&self, t: f64) -> f64 {
        let x = ((0.5 * self.t0 - t) / (0.25 * self.t0)).clamp(0.0, 1.0);
        self.r + (self.widen_to - self.r) * x
    }

    /// Retraction progress, from `0` at `t0/4` to `1` as `t → 0`.
    pub fn retraction(&self, t: f64) -> f64 {
        (1.0 - 4.0 * t / self.t0).clamp(0.0, 1.0)
    }
}

/// `r = 0.9·sin(π/(2g+2))`, `h = min(r/10, e^{−(8(g+1)+1)})`.
pub fn default_schedule(g: u32) -> Result<SweepoutSchedule> {
    if g == 0 {
        return Err(Error::InvalidSchedule("g must be >= 1".into()));
    }
    let r = 0.9 * r_bar(g);
    let h = (r / 10.0).min(libm::exp(-(8.0 * (g as f64 + 1.0) + 1.0)));
    SweepoutSchedule::with_parameters(g, r, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedules_are_valid() {
        for g in 1..=10 {
            let s = default_schedule(g).unwrap();
            assert!(-libm::log(s.h) > 8.0 * (g as f64 + 1.0));
            assert!(s.r > 5.0 * s.t0);
            assert!(5.0 * s.t0 >= 10.0 * (g as f64 + 1.0) * s.eps0 * (1.0 - 1e-12));
            assert!(s.eps(0.999_999) < s.eps0 * 1e-5);
            assert_eq!(s.eps(s.t0), s.eps0);
        }
    }

    #[test]
    fn stage_parameters_are_continuous() {
        let s = default_schedule(2).unwrap();
        let t0 = s.t0;
        let cosh_s0 = libm::cosh(s.neck_parameter(t0) * t0);
        assert!((s.r / cosh_s0 - s.eps0).abs() < 1e-12 * s.eps0);
        assert_eq!(s.neck_parameter(0.5 * t0), 0.0);
        assert_eq!(s.widening_radius(0.5 * t0), s.r);
        assert_eq!(s.widening_radius(0.25 * t0), s.widen_to);
        assert_eq!(s.retraction(0.25 * t0), 0.0);
        assert_eq!(s.stage(t0).unwrap(), Stage::Ribbons);
        assert_eq!(s.stage(0.5 * t0).unwrap(), Stage::Replacement);
        assert_eq!(s.stage(0.25 * t0).unwrap(), Stage::Widening);
        assert_eq!(s.stage(0.2 * t0).unwrap(), Stage::Retraction);
        assert!(s.stage(0.0).is_err() && s.stage(1.0).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(SweepoutSchedule::with_parameters(1, 0.8, 1e-9).is_err());
        assert!(SweepoutSchedule::with_parameters(1, 0.5, 1e-3).is_err());
        assert!(SweepoutSchedule::with_parameters(1, 0.5, 1e-8).is_ok());
    }
}
