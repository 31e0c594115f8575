//! Worker-pool versions of the per-slice and per-chunk loops. Results are
//! collected in input order, so they match the serial versions exactly.

use std::env;

use fbms_core::sweepout::{build_slice, certify_slice, stage_jumps, SweepReport, SweepoutSchedule};
use fbms_core::width::{
    complement_symmetry_report_with, volume_chunk, width_bracket, SideField, VolumeCounts,
    VolumeEstimate, WidthBracket, VOLUME_CHUNK,
};
use fbms_core::TriMesh;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "FBMS_THREADS";

/// Complement check sample count and surface band.
pub const COMPLEMENT_SAMPLES: u64 = 100_000;
pub const COMPLEMENT_BAND: f64 = 1e-9;

/// Pool sized by `FBMS_THREADS` when set, otherwise by the machine.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!(
                "{THREADS_VAR} must be a positive integer, got {v:?}"
            ))
        })?;
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

/// Certify every slice of `grid` in parallel.
pub fn certify_sweep(
    schedule: &SweepoutSchedule,
    grid: &[f64],
    resolution: u32,
) -> Result<SweepReport> {
    let slices = grid
        .par_iter()
        .map(|&t| certify_slice(schedule, t, resolution))
        .collect::<fbms_core::Result<Vec<_>>>()?;
    let jumps = stage_jumps(schedule, resolution)?;
    Ok(SweepReport::from_parts(
        *schedule, resolution, slices, jumps,
    ))
}

/// Half-volume estimate with the sample chunks spread over the pool.
pub fn half_volume_residual(mesh: &TriMesh, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    half_volume_with(&SideField::new(mesh, seed)?, samples, seed)
}

fn half_volume_with(field: &SideField, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    let chunks = samples.div_ceil(VOLUME_CHUNK);
    let total = (0..chunks)
        .into_par_iter()
        .map(|i| volume_chunk(field, seed, i, VOLUME_CHUNK.min(samples - i * VOLUME_CHUNK)))
        .reduce(VolumeCounts::default, VolumeCounts::merge);
    Ok(VolumeEstimate::from_counts(total)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthSlice {
    pub t: f64,
    pub area: f64,
    pub volume: Option<f64>,
    pub volume_residual: Option<f64>,
    pub sigma: Option<f64>,
    pub disagreement_rate: Option<f64>,
    pub volume_ok: bool,
    pub complement_tested: u64,
    pub complement_mismatches: u64,
    pub complement_ok: bool,
    pub error: Option<String>,
}

impl WidthSlice {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.volume_ok && self.complement_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthAudit {
    pub g: u32,
    pub grid_size: usize,
    pub lower: f64,
    pub upper: Option<f64>,
    pub margin: Option<f64>,
    pub bracket: Option<WidthBracket>,
    pub bracket_error: Option<String>,
    pub samples: u64,
    pub seed: u64,
    pub tol_sigma: f64,
    pub per_slice: Vec<WidthSlice>,
}

impl WidthAudit {
    pub fn passed(&self) -> bool {
        self.bracket.is_some() && self.per_slice.iter().all(WidthSlice::passed)
    }
}

fn audit_slice(
    sweep: &SweepReport,
    i: usize,
    samples: u64,
    seed: u64,
    tol_sigma: f64,
) -> WidthSlice {
    let c = &sweep.slices[i];
    let mut out = WidthSlice {
        t: c.t,
        area: c.area,
        volume: None,
        volume_residual: None,
        sigma: None,
        disagreement_rate: None,
        volume_ok: false,
        complement_tested: 0,
        complement_mismatches: 0,
        complement_ok: false,
        error: None,
    };
    let run = |out: &mut WidthSlice| -> Result<()> {
        let mesh = build_slice(&sweep.schedule, c.t, sweep.resolution)?;
        let field = SideField::new(&mesh, seed)?;
        let v = half_volume_with(&field, samples, seed)?;
        out.volume = Some(v.volume);
        out.volume_residual = Some(v.residual);
        out.sigma = Some(v.sigma);
        out.disagreement_rate = Some(v.disagreement_rate);
        out.volume_ok = v.within(tol_sigma);
        let cc = complement_symmetry_report_with(
            &field,
            &mesh,
            sweep.schedule.g,
            COMPLEMENT_SAMPLES,
            COMPLEMENT_BAND,
            seed,
        )?;
        out.complement_tested = cc.tested;
        out.complement_mismatches = cc.mismatches;
        out.complement_ok = cc.passed();
        Ok(())
    };
    if let Err(e) = run(&mut out) {
        out.error = Some(e.to_string());
    }
    out
}

/// Width bracket of a certified sweep plus the half-volume and complement
/// checks on each of its slices. Per-slice failures are recorded, not
/// raised.
pub fn width_audit(sweep: &SweepReport, samples: u64, seed: u64, tol_sigma: f64) -> WidthAudit {
    let g = sweep.schedule.g;
    let (bracket, bracket_error) = match width_bracket(g, sweep) {
        Ok(b) => (Some(b), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let per_slice = (0..sweep.slices.len())
        .into_par_iter()
        .map(|i| audit_slice(sweep, i, samples, seed, tol_sigma))
        .collect();
    WidthAudit {
        g,
        grid_size: sweep.slices.len(),
        lower: std::f64::consts::PI,
        upper: bracket.as_ref().map(|b| b.upper),
        margin: bracket.as_ref().map(|b| b.margin),
        bracket,
        bracket_error,
        samples,
        seed,
        tol_sigma,
        per_slice,
    }
}
