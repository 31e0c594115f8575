//! The pipelines behind each command.

use std::fs;
use std::path::{Path, PathBuf};

use fbms_core::catenoid::{
    catenoid_estimate_check, default_s_grid, tangency_ratio, tangency_root, verify_unstable_max,
    CatenoidFamily, EstimateCheck, MaximalityReport,
};
use fbms_core::geom::mesh::Symmetry;
use fbms_core::minimize::{
    boundary_endpoint_check, genus_certificate, max_slice_seed, minimize, GenusReport,
    MinimalSurfaceCertificate,
};
use fbms_core::sweepout::{sweep_grid, SweepReport};
use fbms_core::{rng, DihedralGroup, TriMesh, Vec3};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::error::{CliError, Result};
use crate::obj::{load_obj, save_obj};
use crate::parallel::{self, WidthAudit};
use crate::report::{write_csv, write_json};

/// `(r, h)` pairs run by `catenoid` when none is given.
pub const CATENOID_SUITE: [(f64, f64); 3] = [(1.0, 0.2), (1.0, 0.05), (0.5, 0.04)];

/// Grid points and extent (in units of `s₂`) of the maximality scan.
const S_GRID_POINTS: usize = 10_000;
const S_GRID_EXTENT: f64 = 4.0;

/// Equivariance a minimizer result must meet.
pub const EQUIVARIANCE_TOLERANCE: f64 = 1e-12;

/// Pass flag and files of one pipeline.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

impl Artifacts {
    fn join(&mut self, other: Artifacts) {
        self.passed &= other.passed;
        self.files.extend(other.files);
    }
}

/// Run `cfg.command` on a pool capped by `FBMS_THREADS`, writing into
/// `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<Artifacts> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out).map_err(CliError::io(&cfg.out))?;
    let pool = parallel::thread_pool()?;
    pool.install(|| match cfg.command {
        Command::Catenoid => catenoid(cfg),
        Command::Sweep => sweep(cfg).map(|(_, a)| a),
        Command::Width => {
            let (s, mut a) = sweep(cfg)?;
            a.join(width(cfg, &s)?);
            Ok(a)
        }
        Command::Minimize => minimize_run(cfg, None),
        Command::All => all(cfg),
    })
}

fn file(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

#[derive(Debug, Clone, Serialize)]
pub struct CatenoidRow {
    pub r: f64,
    pub h: f64,
    pub s1: f64,
    pub s2: f64,
    #[serde(rename = "A_s1")]
    pub a_s1: f64,
    #[serde(rename = "A_s2")]
    pub a_s2: f64,
    #[serde(rename = "A_cyl")]
    pub a_cyl: f64,
    pub bound_rhs: f64,
    pub margin: f64,
    pub s2h: f64,
    pub checks_passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatenoidCase {
    pub maximality: MaximalityReport,
    pub estimate: EstimateCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatenoidReport {
    pub tangency_root: f64,
    pub tangency_ratio: f64,
    pub cases: Vec<CatenoidCase>,
}

pub fn catenoid_case(r: f64, h: f64) -> Result<CatenoidCase> {
    let fam = CatenoidFamily::new(r, h).map_err(|e| CliError::Usage(e.to_string()))?;
    if !fam.in_maximality_regime() || h.is_nan() || h >= 1.0 {
        return Err(CliError::Usage(format!(
            "need 2h < r·tanh(1) and h < 1, got r = {r}, h = {h}"
        )));
    }
    let grid = default_s_grid(&fam, S_GRID_EXTENT, S_GRID_POINTS)?;
    Ok(CatenoidCase {
        maximality: verify_unstable_max(&fam, &grid)?,
        estimate: catenoid_estimate_check(&fam)?,
    })
}

fn catenoid(cfg: &RunConfig) -> Result<Artifacts> {
    let pairs: Vec<(f64, f64)> = match (cfg.r, cfg.h) {
        (Some(r), Some(h)) => vec![(r, h)],
        _ => CATENOID_SUITE.to_vec(),
    };
    let cases = pairs
        .par_iter()
        .map(|&(r, h)| catenoid_case(r, h))
        .collect::<Result<Vec<_>>>()?;
    let rows = cases.iter().map(|c| {
        let m = &c.maximality;
        CatenoidRow {
            r: m.r,
            h: m.h,
            s1: m.s1,
            s2: m.s2,
            a_s1: m.area_s1,
            a_s2: m.area_s2,
            a_cyl: m.area_cylinder,
            bound_rhs: c.estimate.rhs,
            margin: c.estimate.margin,
            s2h: m.s2 * m.h,
            checks_passed: m.passed(),
        }
    });
    let passed = cases.iter().all(|c| c.maximality.passed());
    let (csv, json) = (file(cfg, "catenoid.csv"), file(cfg, "catenoid.json"));
    write_csv(&csv, cfg, rows)?;
    let report = CatenoidReport {
        tangency_root: tangency_root(),
        tangency_ratio: tangency_ratio(),
        cases,
    };
    write_json(&json, cfg, passed, &report)?;
    Ok(Artifacts {
        passed,
        files: vec![csv, json],
    })
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    g: u32,
    t: f64,
    stage: u32,
    area: f64,
    bound: f64,
    genus: Option<u32>,
    boundary_components: Option<usize>,
    equivariance_residual: f64,
    pass: bool,
}

/// Certified sweep for `cfg.g` on `cfg.grid` points.
pub fn certified_sweep(cfg: &RunConfig) -> Result<SweepReport> {
    let schedule = cfg.schedule()?;
    let grid = sweep_grid(&schedule, cfg.grid);
    parallel::certify_sweep(&schedule, &grid, cfg.sweep_resolution())
}

fn sweep(cfg: &RunConfig) -> Result<(SweepReport, Artifacts)> {
    let report = certified_sweep(cfg)?;
    let g = cfg.g;
    let rows = report.slices.iter().map(|c| SweepRow {
        g: c.g,
        t: c.t,
        stage: c.stage.number(),
        area: c.area,
        bound: c.bound,
        genus: c.genus,
        boundary_components: c.boundary_components,
        equivariance_residual: c.equivariance_residual,
        pass: c.passed(),
    });
    let (csv, json, obj) = (
        file(cfg, &format!("sweep_g{g}.csv")),
        file(cfg, &format!("sweep_g{g}.json")),
        file(cfg, &format!("sweep_g{g}_max.obj")),
    );
    write_csv(&csv, cfg, rows)?;
    write_json(&json, cfg, report.passed(), &report)?;
    let (_, mesh) = max_slice_seed(&report.schedule, &report, report.resolution)?;
    save_obj(&obj, &mesh)?;
    let passed = report.passed();
    Ok((
        report,
        Artifacts {
            passed,
            files: vec![csv, json, obj],
        },
    ))
}

fn width(cfg: &RunConfig, sweep: &SweepReport) -> Result<Artifacts> {
    let audit: WidthAudit = parallel::width_audit(sweep, cfg.samples, cfg.seed, cfg.tol_sigma);
    let path = file(cfg, &format!("width_g{}.json", cfg.g));
    let passed = audit.passed();
    write_json(&path, cfg, passed, &audit)?;
    Ok(Artifacts {
        passed,
        files: vec![path],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizeReport {
    pub seed_source: String,
    pub seed_t: Option<f64>,
    pub seed_area: f64,
    pub certificate: MinimalSurfaceCertificate,
    pub genus_report: Option<GenusReport>,
    pub genus_report_error: Option<String>,
    pub boundary_endpoint_check: Option<bool>,
    pub boundary_endpoint_error: Option<String>,
}

impl MinimizeReport {
    pub fn passed(&self, g: u32, tol_fb: f64) -> bool {
        let c = &self.certificate;
        c.converged
            && c.error.is_none()
            && c.genus == Some(g)
            && c.boundary_components == Some(1)
            && c.equivariance_residual
                .is_some_and(|e| e <= EQUIVARIANCE_TOLERANCE)
            && c.area_in_range()
            && c.free_boundary_residual <= tol_fb
            && self.genus_report.as_ref().is_some_and(|r| r.passed)
            && self.boundary_endpoint_check == Some(true)
    }
}

#[derive(Debug, Clone, Serialize)]
struct IterationRow {
    iter: u32,
    area: f64,
    grad_norm: f64,
    step: f64,
    free_boundary_residual: f64,
}

/// Seed OBJ with orbits detected for `D_{g+1}`.
fn seed_from_obj(path: &Path, group: &DihedralGroup) -> Result<TriMesh> {
    let mut m = load_obj(path)?;
    let scale = m
        .vertices
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    m.symmetry = Some(Symmetry::detect(&m, group, 1e-9 * scale)?);
    Ok(m)
}

fn perturb(m: &mut TriMesh, amp: f64, seed: u64) {
    let mut r = rng::stream(seed, rng::streams::PERTURBATION);
    for p in &mut m.vertices {
        let u = Vec3::new(
            rng::uniform(&mut r),
            rng::uniform(&mut r),
            rng::uniform(&mut r),
        );
        *p += (u - Vec3::new(0.5, 0.5, 0.5)) * (2.0 * amp);
    }
}

/// Descent from `cfg.mesh`, or from the max-area slice of `sweep` (run
/// here when not given).
pub fn minimize_report(
    cfg: &RunConfig,
    sweep: Option<&SweepReport>,
) -> Result<(
    MinimizeReport,
    TriMesh,
    Vec<fbms_core::minimize::IterationRecord>,
)> {
    let g = cfg.g;
    let opts = cfg.minimize_options()?;
    let group = DihedralGroup::for_genus(g)?;
    let (source, seed_t, mut seed) = match &cfg.mesh {
        Some(p) => (p.display().to_string(), None, seed_from_obj(p, &group)?),
        None => {
            let owned;
            let s = match sweep {
                Some(s) => s,
                None => {
                    owned = certified_sweep(cfg)?;
                    &owned
                }
            };
            let (t, m) = max_slice_seed(&s.schedule, s, cfg.seed_resolution())?;
            ("max-area slice".to_string(), Some(t), m)
        }
    };
    if cfg.perturb > 0.0 {
        perturb(&mut seed, cfg.perturb, cfg.seed);
    }
    let seed_area = seed.area();
    let out = minimize(&seed, &opts)?;
    let (genus_report, genus_report_error) = match genus_certificate(&out.mesh, g) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (boundary_endpoint_check, boundary_endpoint_error) =
        match boundary_endpoint_check(&out.mesh, g) {
            Ok(b) => (Some(b), None),
            Err(e) => (None, Some(e.to_string())),
        };
    let report = MinimizeReport {
        seed_source: source,
        seed_t,
        seed_area,
        certificate: out.certificate,
        genus_report,
        genus_report_error,
        boundary_endpoint_check,
        boundary_endpoint_error,
    };
    Ok((report, out.mesh, out.log))
}

fn minimize_run(cfg: &RunConfig, sweep: Option<&SweepReport>) -> Result<Artifacts> {
    let (report, mesh, log) = minimize_report(cfg, sweep)?;
    let g = cfg.g;
    let (obj, json, csv) = (
        file(cfg, &format!("minimize_g{g}.obj")),
        file(cfg, &format!("minimize_g{g}_certificate.json")),
        file(cfg, &format!("minimize_g{g}_iterations.csv")),
    );
    let passed = report.passed(g, cfg.tol_fb);
    save_obj(&obj, &mesh)?;
    write_json(&json, cfg, passed, &report)?;
    write_csv(
        &csv,
        cfg,
        log.iter().map(|r| IterationRow {
            iter: r.iteration,
            area: r.area,
            grad_norm: r.gradient_norm,
            step: r.step,
            free_boundary_residual: r.free_boundary_residual,
        }),
    )?;
    Ok(Artifacts {
        passed,
        files: vec![obj, json, csv],
    })
}

#[derive(Serialize)]
struct Summary {
    catenoid: bool,
    sweep: bool,
    width: bool,
    minimize: bool,
}

fn all(cfg: &RunConfig) -> Result<Artifacts> {
    let cat = catenoid(cfg)?;
    let (s, sw) = sweep(cfg)?;
    let wd = width(cfg, &s)?;
    let mn = minimize_run(cfg, Some(&s))?;
    let summary = Summary {
        catenoid: cat.passed,
        sweep: sw.passed,
        width: wd.passed,
        minimize: mn.passed,
    };
    let mut a = Artifacts {
        passed: true,
        files: Vec::new(),
    };
    for x in [cat, sw, wd, mn] {
        a.join(x);
    }
    let path = file(cfg, "summary.json");
    write_json(&path, cfg, a.passed, &summary)?;
    a.files.push(path);
    Ok(a)
}
