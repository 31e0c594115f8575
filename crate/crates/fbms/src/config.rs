//! Run configuration: defaults, then flat `key = value` files, then flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fbms_core::minimize::{options_for_genus, MinimizeOptions};
use fbms_core::sweepout::{default_schedule, SweepoutSchedule};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Catenoid,
    Sweep,
    Width,
    Minimize,
    All,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "catenoid" => Self::Catenoid,
            "sweep" => Self::Sweep,
            "width" => Self::Width,
            "minimize" => Self::Minimize,
            "all" => Self::All,
            _ => {
                return Err(format!(
                    "unknown command {s:?}; expected catenoid, sweep, width, minimize or all"
                ))
            }
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Catenoid => "catenoid",
            Self::Sweep => "sweep",
            Self::Width => "width",
            Self::Minimize => "minimize",
            Self::All => "all",
        })
    }
}

/// Fully resolved settings of one run; embedded verbatim in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub g: u32,
    /// Sweep grid size.
    pub grid: usize,
    /// Slice resolution; unset means `64(g+1)` for sweeps and `32(g+1)`
    /// for the minimizer seed.
    pub resolution: Option<u32>,
    pub out: PathBuf,
    pub seed: u64,
    /// Monte Carlo samples per slice.
    pub samples: u64,
    /// Allowed volume residual in standard errors.
    pub tol_sigma: f64,
    /// Minimizer gradient tolerance.
    pub tol_grad: f64,
    /// Free boundary angle a converged surface must meet, in radians.
    pub tol_fb: f64,
    pub r: Option<f64>,
    pub h: Option<f64>,
    pub t0: Option<f64>,
    /// Seed mesh for the minimizer; the max-area slice when unset.
    pub mesh: Option<PathBuf>,
    pub step: Option<f64>,
    pub max_iter: Option<u32>,
    /// Orbit-averaging cadence in iterations.
    pub cadence: Option<u32>,
    pub smoothing: Option<f64>,
    /// Amplitude of a seeded random perturbation of the minimizer seed.
    pub perturb: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::All,
            g: 1,
            grid: 200,
            resolution: None,
            out: PathBuf::from("fbms-out"),
            seed: 0,
            samples: 1_000_000,
            tol_sigma: 3.0,
            tol_grad: 1e-6,
            tol_fb: 1e-3,
            r: None,
            h: None,
            t0: None,
            mesh: None,
            step: None,
            max_iter: None,
            cadence: None,
            smoothing: None,
            perturb: 0.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("{key}: cannot parse {value:?}: {e}"))
}

impl RunConfig {
    /// Set one key. Dashes and underscores are interchangeable; `tol` is
    /// `tol_grad`.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let key = key.replace('-', "_");
        let k = key.as_str();
        match k {
            "command" => self.command = parse(k, value)?,
            "g" => self.g = parse(k, value)?,
            "grid" => self.grid = parse(k, value)?,
            "resolution" => self.resolution = Some(parse(k, value)?),
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = parse(k, value)?,
            "samples" => self.samples = parse::<f64>(k, value).and_then(|x| as_count(k, x))?,
            "tol_sigma" => self.tol_sigma = parse(k, value)?,
            "tol_grad" | "tol" => self.tol_grad = parse(k, value)?,
            "tol_fb" => self.tol_fb = parse(k, value)?,
            "r" => self.r = Some(parse(k, value)?),
            "h" => self.h = Some(parse(k, value)?),
            "t0" => self.t0 = Some(parse(k, value)?),
            "mesh" => self.mesh = Some(PathBuf::from(value)),
            "step" => self.step = Some(parse(k, value)?),
            "max_iter" => self.max_iter = Some(parse(k, value)?),
            "cadence" => self.cadence = Some(parse(k, value)?),
            "smoothing" => self.smoothing = Some(parse(k, value)?),
            "perturb" => self.perturb = parse(k, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Apply `key = value` (or `key value`) lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .or_else(|| line.split_once(char::is_whitespace))
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("expected `key = value`, got {line:?}"),
                })?;
            self.set(k, v).map_err(|message| CliError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        self.apply_text(&text, path)
    }

    pub fn sweep_resolution(&self) -> u32 {
        self.resolution.unwrap_or(64 * (self.g + 1))
    }

    pub fn seed_resolution(&self) -> u32 {
        self.resolution.unwrap_or(32 * (self.g + 1))
    }

    /// Default schedule for `g` with the `r`, `h` and `t0` overrides; `t0`
    /// is tied to `h`, so either one sets both.
    pub fn schedule(&self) -> Result<SweepoutSchedule> {
        let base = default_schedule(self.g).map_err(usage)?;
        let h = match (self.h, self.t0) {
            (Some(h), Some(t0)) if h != t0 => {
                return Err(CliError::Usage(format!(
                    "t0 must equal h, got t0 = {t0}, h = {h}"
                )))
            }
            (Some(h), _) | (None, Some(h)) => h,
            (None, None) => base.h,
        };
        if self.r.is_none() && h == base.h {
            return Ok(base);
        }
        SweepoutSchedule::with_parameters(self.g, self.r.unwrap_or(base.r), h).map_err(usage)
    }

    pub fn minimize_options(&self) -> Result<MinimizeOptions> {
        let mut o = options_for_genus(self.g).map_err(usage)?;
        o.gradient_tolerance = self.tol_grad;
        if let Some(s) = self.step {
            o.initial_step = s;
        }
        if let Some(m) = self.max_iter {
            o.max_iterations = m;
        }
        if let Some(c) = self.cadence {
            o.symmetrize_every = c;
        }
        if let Some(s) = self.smoothing {
            o.smoothing = s;
        }
        o.validate().map_err(usage)?;
        Ok(o)
    }

    /// Reject values no command can run with.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.g == 0 {
            return bad("g must be at least 1".into());
        }
        if self.grid < 2 {
            return bad(format!("grid must be at least 2, got {}", self.grid));
        }
        if let Some(r) = self.resolution {
            if r == 0 || r % (self.g + 1) != 0 {
                return bad(format!(
                    "resolution must be a positive multiple of g+1 = {}, got {r}",
                    self.g + 1
                ));
            }
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        for (name, v) in [("tol_sigma", self.tol_sigma), ("tol_fb", self.tol_fb)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.perturb >= 0.0 && self.perturb.is_finite()) {
            return bad(format!("perturb must be >= 0, got {}", self.perturb));
        }
        if matches!(self.command, Command::Catenoid) && self.r.is_some() != self.h.is_some() {
            return bad(
                "catenoid takes both --r and --h, or neither for the standard suite".into(),
            );
        }
        if !matches!(self.command, Command::Catenoid) {
            self.schedule()?;
        }
        self.minimize_options()?;
        Ok(())
    }
}

fn usage(e: fbms_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn as_count(key: &str, x: f64) -> std::result::Result<u64, String> {
    if x >= 1.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("{key}: {x} is not a positive integer"))
    }
}
