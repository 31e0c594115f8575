//! Area descent checked against finite differences, the flat disc and the
//! critical catenoid.

use std::f64::consts::PI;

use fbms_core::geom::{equivariance_residual, DihedralGroup, TriMesh, Vec3};
use fbms_core::minimize::*;
use fbms_core::rng;
use fbms_core::sweepout::{build_slice, default_schedule};
use proptest::prelude::*;

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

/// Disc bent by `amp·r²·sin 2φ` plus small noise, boundary back on the sphere.
fn perturbed_disc(segments: u32, rings: u32, amp: f64, seed: u64) -> TriMesh {
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

fn central_difference(m: &TriMesh, v: usize, h: f64) -> Vec3 {
    let mut c = [0.0; 3];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut e = Vec3::ZERO;
        match k {
            0 => e.x = h,
            1 => e.y = h,
            _ => e.z = h,
        }
        let mut plus = m.clone();
        plus.vertices[v] += e;
        let mut minus = m.clone();
        minus.vertices[v] -= e;
        *ck = (discrete_area(&plus) - discrete_area(&minus)) / (2.0 * h);
    }
    Vec3::new(c[0], c[1], c[2])
}

#[test]
fn gradient_matches_central_differences() {
    let mut meshes = vec![
        perturbed_disc(24, 6, 0.3, 1),
        perturbed_disc(40, 8, 0.1, 2),
        critical_catenoid_seed(24).unwrap(),
        perturbed_disc(18, 4, 0.5, 4),
        TriMesh::equivariant_disc(3, 30, 5).unwrap(),
    ];
    for (i, m) in meshes.iter_mut().enumerate().skip(2) {
        jitter(m, 0.01, 10 + i as u64);
    }
    let mut r = rng::stream(5, rng::streams::PERTURBATION);
    for m in &meshes {
        let g = area_gradient(m).unwrap();
        for _ in 0..20 {
            let v = (rng::uniform(&mut r) * m.vertices.len() as f64) as usize;
            let fd = central_difference(m, v, 1e-5);
            let err = (fd - g[v]).norm() / g[v].norm();
            assert!(err <= 1e-6, "vertex {v}: {err:e}");
        }
    }
}

#[test]
fn perturbed_disc_relaxes_to_a_flat_disc() {
    // The equatorial disc has index one for free boundary area (vertical
    // translation lowers area), so the run keeps the D_2 symmetry, whose
    // half turns rule out translations and tilts.
    let mut seed = TriMesh::equivariant_disc(2, 64, 16).unwrap();
    let mut r = rng::stream(3, rng::streams::PERTURBATION);
    for p in &mut seed.vertices {
        let (r2, phi) = (p.x * p.x + p.y * p.y, p.y.atan2(p.x));
        p.z += 0.1 * r2 * (2.0 * phi).sin() + 0.02 * (rng::uniform(&mut r) - 0.5);
    }
    let opts = MinimizeOptions {
        max_iterations: 2000,
        group: Some(DihedralGroup::new(2).unwrap()),
        ..MinimizeOptions::default()
    };
    let out = minimize(&seed, &opts).unwrap();
    let c = &out.certificate;
    assert!(c.converged, "{c:?}");
    assert!((c.area - PI).abs() <= 5e-3 * PI, "{}", c.area);
    assert!(
        c.free_boundary_residual <= 1e-3,
        "{}",
        c.free_boundary_residual
    );
    assert_eq!((c.genus, c.boundary_components), (Some(0), Some(1)));
    assert!(out.log.windows(2).all(|w| w[1].area <= w[0].area));
}

#[test]
fn critical_catenoid_is_nearly_stationary() {
    // Unstable, so the check is that the discrete residuals shrink under
    // refinement rather than that descent stays put.
    let mut last = (f64::INFINITY, f64::INFINITY);
    for res in [16, 32, 64, 128] {
        let seed = critical_catenoid_seed(res).unwrap();
        let c = certify_surface(&seed, None, RunStatus::default());
        assert_eq!((c.genus, c.boundary_components), (Some(0), Some(2)));
        assert!(c.mean_curvature_residual < last.0 && c.free_boundary_residual < last.1);
        last = (c.mean_curvature_residual, c.free_boundary_residual);
    }
}

#[test]
fn slices_pass_the_genus_and_endpoint_checks() {
    for g in [1u32, 2] {
        let s = default_schedule(g).unwrap();
        let m = build_slice(&s, 0.5, 32 * (g + 1)).unwrap();
        let r = genus_certificate(&m, g).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!((r.gamma, r.j, r.solution), (g, 1, Some((0, 1))));
        assert_eq!(r.hurwitz, Some(true));
        assert!(boundary_endpoint_check(&m, g).unwrap());
    }
    // Genus 1 claimed against g = 2 has no solution.
    let m = build_slice(&default_schedule(1).unwrap(), 0.5, 64).unwrap();
    let r = genus_certificate(&m, 2).unwrap();
    assert!(!r.passed && r.solution.is_none());
}

#[test]
fn short_equivariant_run_keeps_every_constraint() {
    let g = 1;
    let s = default_schedule(g).unwrap();
    let seed = build_slice(&s, 0.5, 32 * (g + 1)).unwrap();
    let opts = MinimizeOptions {
        max_iterations: 20,
        ..options_for_genus(g).unwrap()
    };
    let out = minimize(&seed, &opts).unwrap();
    let c = &out.certificate;
    assert_eq!((c.genus, c.boundary_components), (Some(1), Some(1)));
    assert!(c.equivariance_residual.unwrap() <= 1e-12);
    assert!(c.axis_residuals.iter().all(|&r| r <= AXIS_TOLERANCE));
    assert_eq!(c.j, Some(1));
    assert!(c.area <= seed.area());
    for (p, t) in out.mesh.vertices.iter().zip(&out.mesh.tags) {
        if t.on_sphere {
            assert!((p.norm() - 1.0).abs() <= 1e-12);
        }
    }
    assert!(boundary_endpoint_check(&out.mesh, g).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projection_restores_equivariance(g in 1u32..4, t in 0.05f64..0.95, amp in 0.0f64..0.05, seed in 0u64..1000) {
        let s = default_schedule(g).unwrap();
        let mut m = build_slice(&s, t, 16 * (g + 1)).unwrap();
        jitter(&mut m, amp, seed);
        let group = DihedralGroup::for_genus(g).unwrap();
        let p = project_constraints(&m, &group).unwrap();
        prop_assert!(equivariance_residual(&p, &group).unwrap() <= 1e-12);
        let q = project_constraints(&p, &group).unwrap();
        for (a, b) in p.vertices.iter().zip(&q.vertices) {
            prop_assert!(a.distance(*b) <= 1e-15);
        }
        for (x, tag) in p.vertices.iter().zip(&p.tags) {
            if tag.on_sphere {
                prop_assert!((x.norm() - 1.0).abs() <= 1e-12);
            } else {
                prop_assert!(x.norm() <= 1.0 + 1e-15);
            }
        }
    }
}
