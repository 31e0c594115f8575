//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Sweeps are certified once per genus and shared by the sweep, width,
//! volume and minimizer criteria. Expect several minutes with one thread.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use fbms::parallel::{self, width_audit};
use fbms_core::catenoid::{
    area, default_s_grid, solve_balance, tangency_ratio, tangency_root, verify_unstable_max,
    CatenoidFamily,
};
use fbms_core::geom::hurwitz::{quotient_euler_characteristic, quotient_mesh};
use fbms_core::geom::{equivariant_genus_solve, euler_characteristic, riemann_hurwitz_check, Bvh};
use fbms_core::minimize::{
    area_gradient, boundary_endpoint_check, critical_catenoid_seed, discrete_area, max_slice_seed,
    minimize, options_for_genus, xi0_crossings, MinimizeOptions,
};
use fbms_core::sweepout::{
    build_slice, default_schedule, slice_area_bound, slice_bound_excess, sweep_grid, SweepReport,
    SweepoutSchedule,
};
use fbms_core::width::width_bracket;
use fbms_core::{rng, DihedralGroup, TriMesh, Vec3};

// Tolerances.
const CLOSED_FORM_REL: f64 = 1e-8;
const TANGENCY_ABS: f64 = 1e-10;
const TANGENCY_RATIO_FLOOR: f64 = 0.6627;
const S_GRID_POINTS: usize = 10_000;
const S_GRID_EXTENT: f64 = 4.0;
const SWEEP_GENERA: [u32; 4] = [1, 2, 3, 5];
const SWEEP_POINTS: usize = 200;
const MC_SAMPLES: u64 = 1_000_000;
const MC_SIGMAS: f64 = 3.0;
const FD_STEP: f64 = 1e-5;
const FD_REL: f64 = 1e-6;
const DISC_AREA_REL: f64 = 5e-3;
const FREE_BOUNDARY_RAD: f64 = 1e-3;
const EQUIVARIANCE: f64 = 1e-12;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        (b - a) / 6.0 * (fa + 4.0 * fm + fb),
        tol,
        60,
    )
}

/// `4π∫₀^h ρ√(ρ'² + 1) dz` for `ρ = r·cosh(sz)/cosh(sh)`.
fn quadrature_area(r: f64, h: f64, s: f64) -> f64 {
    let c = (s * h).cosh();
    let f = |z: f64| {
        let rho = r * (s * z).cosh() / c;
        let d = r * s * (s * z).sinh() / c;
        rho * (d * d + 1.0).sqrt()
    };
    4.0 * PI * simpson(&f, 0.0, h, 1e-14 * r * (r + h))
}

fn closed_form_vs_quadrature() -> Outcome {
    let mut r = rng::stream(2024, rng::streams::PERTURBATION);
    let (mut worst, mut cases) = (0.0f64, 0);
    for _ in 0..50 {
        let rad = 0.1 + 1.9 * rng::uniform(&mut r);
        let h = (0.02 + 0.96 * rng::uniform(&mut r)) * 0.5 * rad * 1f64.tanh();
        let (s1, s2) = solve_balance(rad, h).map_err(|e| format!("r = {rad}, h = {h}: {e}"))?;
        let s3 = 3.0 * s2 * rng::uniform(&mut r);
        for s in [s1, s2, s3] {
            let rel =
                (area(rad, h, s) - quadrature_area(rad, h, s)).abs() / quadrature_area(rad, h, s);
            worst = worst.max(rel);
            cases += 1;
        }
    }
    check(
        worst <= CLOSED_FORM_REL,
        format!("50 (r, h) pairs, {cases} areas, max relative error {worst:.2e} (tol {CLOSED_FORM_REL:e})"),
    )
}

fn tangency_threshold() -> Outcome {
    let f = |t: f64| t.cosh() - t * t.sinh();
    let (mut a, mut b) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(a).signum() == f(m).signum() {
            a = m;
        } else {
            b = m;
        }
    }
    let oracle = 0.5 * (a + b);
    let t0 = tangency_root();
    let ratio = tangency_ratio();
    let consistent = (ratio - 1.0 / t0.sinh()).abs() <= 1e-15;
    check(
        (t0 - oracle).abs() <= TANGENCY_ABS && ratio >= TANGENCY_RATIO_FLOOR && consistent,
        format!(
            "t0 = {t0:.15}, bisection {oracle:.15}, |diff| = {:.1e}; 1/sinh t0 = {ratio:.6} >= {TANGENCY_RATIO_FLOOR}",
            (t0 - oracle).abs()
        ),
    )
}

fn maximality_suite() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (r, h) in fbms::run::CATENOID_SUITE {
        let fam = CatenoidFamily::new(r, h).map_err(|e| e.to_string())?;
        let grid = default_s_grid(&fam, S_GRID_EXTENT, S_GRID_POINTS).map_err(|e| e.to_string())?;
        let rep = verify_unstable_max(&fam, &grid).map_err(|e| e.to_string())?;
        let a2 = quadrature_area(r, h, rep.s2);
        let top = area(r, h, rep.s2);
        let violations = grid.iter().filter(|&&s| area(r, h, s) > top).count();
        let pass = rep.passed()
            && violations == 0
            && rep.s2 * h > 1.0
            && a2 > 2.0 * PI * r * r * 1f64.tanh()
            && a2 > 4.0 * PI * r * h;
        ok &= pass;
        lines.push(format!(
            "({r}, {h}): s2·h = {:.4}, A(s2) = {a2:.6}, grid violations {violations}",
            rep.s2 * h
        ));
    }
    check(ok, lines.join("; "))
}

struct Sweeps(Vec<(u32, SweepReport)>);

fn certify_sweeps() -> Result<Sweeps, String> {
    let mut out = Vec::new();
    for g in SWEEP_GENERA {
        let s = default_schedule(g).map_err(|e| e.to_string())?;
        let grid = sweep_grid(&s, SWEEP_POINTS);
        let rep = parallel::certify_sweep(&s, &grid, 64 * (g + 1))
            .map_err(|e| format!("g = {g}: {e}"))?;
        out.push((g, rep));
    }
    Ok(Sweeps(out))
}

fn sweep_certification(sweeps: &Sweeps) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (g, rep) in &sweeps.0 {
        let bad = rep
            .slices
            .iter()
            .filter(|c| {
                !(c.passed()
                    && c.genus == Some(*g)
                    && c.boundary_components == Some(1)
                    && c.equivariance_residual <= 2.0 * c.max_edge_length
                    && c.area <= c.bound + c.mesh_tolerance)
            })
            .count();
        let pass = bad == 0
            && rep.slices.len() == SWEEP_POINTS
            && rep.margin_ok
            && rep.max_area < 3.0 * PI;
        ok &= pass;
        lines.push(format!(
            "g = {g}: {} slices at resolution {}, {bad} failing, max area {:.12}, margin {:.3e} >= {:.3e}",
            rep.slices.len(),
            rep.resolution,
            rep.max_area,
            rep.margin,
            rep.required_margin
        ));
    }
    check(ok, lines.join("; "))
}

fn negative_control() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for g in SWEEP_GENERA {
        let s = default_schedule(g).map_err(|e| e.to_string())?;
        let eps = 2.0 * s.t0 / (g + 1) as f64;
        let excess = slice_bound_excess(g, s.t0, eps).map_err(|e| e.to_string())?;
        let bad = SweepoutSchedule { eps0: eps, ..s };
        let refused = bad.validate().is_err();
        ok &= excess > 0.0 && (excess - 2.0 * PI * s.t0 * s.t0).abs() <= 1e-12 * excess && refused;
        lines.push(format!(
            "g = {g}: bound − 3π = {excess:.3e}, schedule refused: {refused}"
        ));
    }
    // Same bite at a t0 large enough for the overshoot to show in the bound.
    let t0 = 0.1;
    for g in SWEEP_GENERA {
        let b = slice_area_bound(g, t0, 2.0 * t0 / (g + 1) as f64).map_err(|e| e.to_string())?;
        ok &= b > 3.0 * PI;
        lines.push(format!("g = {g}, t0 = {t0}: bound {b:.6}"));
    }
    check(ok, lines.join("; "))
}

fn width_brackets(sweeps: &Sweeps) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (g, rep) in &sweeps.0 {
        match width_bracket(*g, rep) {
            Ok(b) => {
                let pass = b.lower == PI && b.margin > 0.0 && b.upper <= 3.0 * PI;
                ok &= pass;
                lines.push(format!(
                    "g = {g}: π <= W <= 3π − {:.3e} (upper {:.15})",
                    b.margin, b.upper
                ));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("g = {g}: {e}"));
            }
        }
    }
    check(ok, lines.join("; "))
}

fn volume_bisection(sweeps: &Sweeps) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (g, rep) in &sweeps.0 {
        let audit = width_audit(rep, MC_SAMPLES, 0, MC_SIGMAS);
        let failing: Vec<String> = audit
            .per_slice
            .iter()
            .filter(|s| !s.passed())
            .map(|s| format!("t = {:.3e} {:?}", s.t, s.error))
            .collect();
        let worst = audit
            .per_slice
            .iter()
            .filter_map(|s| Some(s.volume_residual? / s.sigma?))
            .fold(0.0, f64::max);
        ok &= failing.is_empty() && audit.per_slice.len() == rep.slices.len();
        lines.push(format!(
            "g = {g}: {} slices, worst residual {worst:.2}σ, {} failing{}",
            audit.per_slice.len(),
            failing.len(),
            failing
                .first()
                .map(|f| format!(" (first {f})"))
                .unwrap_or_default()
        ));
    }
    check(ok, lines.join("; "))
}

fn topology_arithmetic() -> Outcome {
    let mut pairs = 0;
    let mut bad = Vec::new();
    for g in 1..=5u32 {
        let n = g + 1;
        let s = default_schedule(g).map_err(|e| e.to_string())?;
        let meshes: Vec<(u32, fbms_core::Result<TriMesh>)> = vec![
            (0, TriMesh::equivariant_disc(n, 4 * n, 3)),
            (0, TriMesh::equivariant_disc(n, 8 * n, 5)),
            (1, build_slice(&s, 0.5, 16 * n)),
            (1, build_slice(&s, 0.9, 16 * n)),
        ];
        for (j, m) in meshes {
            pairs += 1;
            let run = || -> fbms_core::Result<bool> {
                let m = m?;
                let chi = euler_characteristic(&m)?;
                let chq = quotient_euler_characteristic(&m)?;
                let (crossings, _) = xi0_crossings(&m, &Bvh::new(&m));
                Ok(chq == 1
                    && euler_characteristic(&quotient_mesh(&m)?)? == chq
                    && crossings == 2 * j + 1
                    && riemann_hurwitz_check(chi, chq, g, j)
                    && !riemann_hurwitz_check(chi, chq, g, 1 - j))
            };
            match run() {
                Ok(true) => {}
                Ok(false) => bad.push(format!("g = {g}, j = {j}")),
                Err(e) => bad.push(format!("g = {g}, j = {j}: {e}")),
            }
        }
    }
    let mut table = 0;
    for g in 1..=8u32 {
        for gamma in 1..=g {
            let brute: Vec<(u32, u32)> = (0..=gamma)
                .flat_map(|q| (0..=gamma).map(move |j| (q, j)))
                .filter(|&(q, j)| (g + 1) * q + j * g == gamma)
                .collect();
            let got = equivariant_genus_solve(g, gamma).map_err(|e| e.to_string())?;
            table += 1;
            if brute.len() > 1
                || got != brute.first().copied()
                || (gamma == g) != (got == Some((0, 1)))
            {
                bad.push(format!(
                    "solve({g}, {gamma}) = {got:?}, brute force {brute:?}"
                ));
            }
        }
    }
    check(
        bad.is_empty() && pairs == 20,
        format!("{pairs} surface/quotient pairs with χ' = 1, {table} genus table entries, failures {bad:?}"),
    )
}

fn jitter(m: &mut TriMesh, amp: f64, seed: u64) {
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

fn bent_disc(segments: u32, rings: u32, amp: f64, seed: u64) -> TriMesh {
    let mut m = TriMesh::polar_disc(segments, rings).unwrap();
    for p in &mut m.vertices {
        let (r2, phi) = (p.x * p.x + p.y * p.y, p.y.atan2(p.x));
        p.z += amp * r2 * (2.0 * phi).sin();
    }
    jitter(&mut m, amp * 0.05, seed);
    for (p, t) in m.vertices.iter_mut().zip(&m.tags) {
        if t.on_sphere {
            *p = *p / p.norm();
        }
    }
    m
}

fn gradient_check() -> Outcome {
    let mut meshes = vec![
        bent_disc(24, 6, 0.3, 1),
        bent_disc(40, 8, 0.1, 2),
        critical_catenoid_seed(24).map_err(|e| e.to_string())?,
        bent_disc(18, 4, 0.5, 4),
        TriMesh::equivariant_disc(3, 30, 5).map_err(|e| e.to_string())?,
    ];
    for (i, m) in meshes.iter_mut().enumerate().skip(2) {
        jitter(m, 0.01, 10 + i as u64);
    }
    let mut r = rng::stream(5, rng::streams::PERTURBATION);
    let mut worst = 0.0f64;
    let mut count = 0;
    for m in &meshes {
        let g = area_gradient(m).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let v = (rng::uniform(&mut r) * m.vertices.len() as f64) as usize;
            let mut fd = [0.0; 3];
            for (k, c) in fd.iter_mut().enumerate() {
                let mut e = [0.0; 3];
                e[k] = FD_STEP;
                let e = Vec3::new(e[0], e[1], e[2]);
                let (mut a, mut b) = (m.clone(), m.clone());
                a.vertices[v] += e;
                b.vertices[v] -= e;
                *c = (discrete_area(&a) - discrete_area(&b)) / (2.0 * FD_STEP);
            }
            let fd = Vec3::new(fd[0], fd[1], fd[2]);
            worst = worst.max((fd - g[v]).norm() / g[v].norm());
            count += 1;
        }
    }
    check(
        worst <= FD_REL,
        format!("{count} vertices on 5 meshes, max relative error {worst:.2e} (tol {FD_REL:e})"),
    )
}

fn disc_rigidity() -> Outcome {
    let mut seed = TriMesh::equivariant_disc(2, 64, 16).map_err(|e| e.to_string())?;
    let mut r = rng::stream(3, rng::streams::PERTURBATION);
    for p in &mut seed.vertices {
        let (r2, phi) = (p.x * p.x + p.y * p.y, p.y.atan2(p.x));
        p.z += 0.1 * r2 * (2.0 * phi).sin() + 0.02 * (rng::uniform(&mut r) - 0.5);
    }
    let opts = MinimizeOptions {
        max_iterations: 2000,
        group: Some(DihedralGroup::new(2).map_err(|e| e.to_string())?),
        ..MinimizeOptions::default()
    };
    let out = minimize(&seed, &opts).map_err(|e| e.to_string())?;
    let c = &out.certificate;
    let rel = (c.area - PI).abs() / PI;
    check(
        c.converged && rel <= DISC_AREA_REL && c.free_boundary_residual <= FREE_BOUNDARY_RAD,
        format!(
            "resolution 64, seed area {:.5}, final area {:.6} ({:.3}% from π), free boundary residual {:.2e} rad, {} iterations",
            seed.area(),
            c.area,
            100.0 * rel,
            c.free_boundary_residual,
            c.iterations
        ),
    )
}

fn m1_candidate(sweeps: &Sweeps) -> Outcome {
    let g = 1;
    let rep = &sweeps
        .0
        .iter()
        .find(|(h, _)| *h == g)
        .ok_or("no g = 1 sweep")?
        .1;
    let (t, seed) = max_slice_seed(&rep.schedule, rep, 64).map_err(|e| e.to_string())?;
    let opts = options_for_genus(g).map_err(|e| e.to_string())?;
    let out = minimize(&seed, &opts).map_err(|e| e.to_string())?;
    let c = &out.certificate;
    let endpoint = boundary_endpoint_check(&out.mesh, g).map_err(|e| e.to_string())?;
    let flagged = c.stalled || c.degenerate || c.iterations >= opts.max_iterations;
    let honest = if c.converged {
        c.gradient_norm <= opts.gradient_tolerance && !flagged
    } else {
        flagged
    };
    let properties = c.genus == Some(g)
        && c.boundary_components == Some(1)
        && c.area > PI
        && c.area < 3.0 * PI
        && c.equivariance_residual.is_some_and(|e| e <= EQUIVARIANCE)
        && endpoint;
    let outcome = if c.converged {
        "converged".to_string()
    } else {
        format!(
            "not converged (stalled {}, degenerate {}, near 3π {}, note {:?})",
            c.stalled, c.degenerate, c.near_three_pi, c.error
        )
    };
    check(
        properties && honest,
        format!(
            "seed t = {t:.3e}, area {:.7} -> {:.7}, genus {:?}, boundary loops {:?}, equivariance {:.1e}, endpoint check {endpoint}, {} iterations, {outcome}",
            seed.area(),
            c.area,
            c.genus,
            c.boundary_components,
            c.equivariance_residual.unwrap_or(f64::NAN),
            c.iterations
        ),
    )
}

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

struct Board {
    failures: usize,
}

impl Board {
    fn run(&mut self, n: u32, name: &str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let o = guarded(f);
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match o {
            Ok(d) => ("PASS", d),
            Err(d) => {
                self.failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n:>2} {tag}  {name} [{secs:.1} s]: {detail}");
    }
}

fn main() -> ExitCode {
    let pool = match parallel::thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    let failures = pool.install(|| {
        let mut b = Board { failures: 0 };
        b.run(1, "catenoid closed form", closed_form_vs_quadrature);
        b.run(2, "balance threshold", tangency_threshold);
        b.run(3, "unstable member is the area maximum", maximality_suite);
        let start = Instant::now();
        let sweeps = guarded(certify_sweeps);
        let built = start.elapsed().as_secs_f64();
        let with = |f: fn(&Sweeps) -> Outcome| -> Outcome {
            match &sweeps {
                Ok(s) => f(s),
                Err(e) => Err(format!("no certified sweeps: {e}")),
            }
        };
        b.run(4, "sweepout slices certified", || {
            with(sweep_certification).map(|d| format!("{d}; sweeps built in {built:.1} s"))
        });
        b.run(5, "wide bite overshoots 3π", negative_control);
        b.run(6, "width bracket", || with(width_brackets));
        b.run(7, "half volume and complement", || with(volume_bisection));
        b.run(
            8,
            "Riemann–Hurwitz and genus arithmetic",
            topology_arithmetic,
        );
        b.run(9, "area gradient vs finite differences", gradient_check);
        b.run(10, "flat disc recovered", disc_rigidity);
        b.run(11, "genus one candidate", || with(m1_candidate));
        b.failures
    });
    println!("{} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
