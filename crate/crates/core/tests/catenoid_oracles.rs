//! Independent numerical oracles for the catenoid family.

use std::f64::consts::PI;

use fbms_core::catenoid::{
    self, area, balance, catenoid_estimate_check, catenoid_mesh, curvature_sign, profile,
    solve_balance, tangency_root, verify_unstable_max, CatenoidFamily,
};
use proptest::prelude::*;

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
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// `4π∫₀^h ρ√(ρ'² + 1) dz` evaluated independently of the closed form.
fn quadrature_area(r: f64, h: f64, s: f64) -> f64 {
    let c = (s * h).cosh();
    let integrand = |z: f64| {
        let rho = r * (s * z).cosh() / c;
        let drho = r * s * (s * z).sinh() / c;
        rho * (drho * drho + 1.0).sqrt()
    };
    4.0 * PI * simpson(&integrand, 0.0, h, 1e-14 * r * (r + h))
}

/// Plain bisection on `[1, 2]` for `cosh t − t·sinh t`.
fn bisection_oracle() -> f64 {
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
    0.5 * (a + b)
}

/// Sign-change scan plus bisection for `rs = cosh(sh)` on `(0, smax)`.
fn scan_roots(r: f64, h: f64, smax: f64) -> Vec<f64> {
    let f = |s: f64| r * s - (s * h).cosh();
    let n = 200_000;
    let mut roots = Vec::new();
    let mut prev = f(0.0);
    for i in 1..=n {
        let s = smax * i as f64 / n as f64;
        let cur = f(s);
        if prev.signum() != cur.signum() {
            let (mut a, mut b) = (smax * (i - 1) as f64 / n as f64, s);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(a).signum() == f(m).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = cur;
    }
    roots
}

#[test]
fn tangency_root_matches_bisection_oracle() {
    let t0 = tangency_root();
    let oracle = bisection_oracle();
    assert!((t0 - oracle).abs() < 1e-10);
    assert!((t0 - 1.19968).abs() < 1e-5);
    assert!(1.0 / t0.sinh() >= 0.6627);
}

#[test]
fn balance_roots_match_scan_oracle() {
    let (s1, s2) = solve_balance(1.0, 0.2).unwrap();
    let scanned = scan_roots(1.0, 0.2, 100.0);
    assert_eq!(scanned.len(), 2);
    assert!((s1 - scanned[0]).abs() < 1e-9);
    assert!((s2 - scanned[1]).abs() < 1e-9);
}

#[test]
fn closed_form_matches_quadrature_example() {
    let a = area(1.0, 0.2, 3.0);
    let q = quadrature_area(1.0, 0.2, 3.0);
    assert!((a - q).abs() <= 1e-8 * a, "{a} vs {q}");
}

#[test]
fn lemma_a1_examples() {
    for (r, h) in [(1.0, 0.2), (1.0, 0.05), (0.5, 0.04)] {
        let fam = CatenoidFamily::new(r, h).unwrap();
        let grid = catenoid::default_s_grid(&fam, 4.0, 10_000).unwrap();
        let rep = verify_unstable_max(&fam, &grid).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
    let rep = verify_unstable_max(&CatenoidFamily::new(1.0, 0.2).unwrap(), &[0.0, 1.0]).unwrap();
    assert!(rep.area_s2 > 2.0 * PI * 1f64.tanh());
    let bad = CatenoidFamily::new(1.0, 0.4).unwrap();
    assert!(verify_unstable_max(&bad, &[0.0]).is_err());
}

#[test]
fn estimate_holds_for_small_h() {
    let fam = CatenoidFamily::new(1.0, 0.01).unwrap();
    let c = catenoid_estimate_check(&fam).unwrap();
    assert!(c.holds && c.margin > 0.0);
    // Margin shrinks toward zero with h.
    let c2 = catenoid_estimate_check(&CatenoidFamily::new(1.0, 1e-4).unwrap()).unwrap();
    assert!(c2.holds && c2.margin < c.margin);
}

#[test]
fn empirical_threshold_is_reported() {
    let h = catenoid::empirical_threshold(1.0).unwrap();
    assert!(h > 0.01);
    let below = CatenoidFamily::new(1.0, 0.5 * h).unwrap();
    assert!(catenoid_estimate_check(&below).unwrap().holds);
}

#[test]
fn mesh_area_converges_to_closed_form() {
    let fam = CatenoidFamily::new(1.0, 0.2).unwrap();
    let (_, s2) = fam.roots.unwrap();
    let exact = area(1.0, 0.2, s2);
    let a64 = catenoid_mesh(&fam, s2, 64).unwrap().area();
    let a128 = catenoid_mesh(&fam, s2, 128).unwrap().area();
    assert!((a128 - exact).abs() < 0.01 * exact);
    // Second-order convergence: the error drops by about four.
    let ratio = (a64 - exact).abs() / (a128 - exact).abs();
    assert!(ratio > 3.0 && ratio < 5.0, "{ratio}");
    let cyl = catenoid_mesh(&fam, 0.0, 256).unwrap().area();
    assert!((cyl - 0.8 * PI).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_quadrature(r in 0.1f64..2.0, hr in 0.01f64..0.37, sf in 0.05f64..3.0) {
        let h = hr * r;
        let (_, s2) = solve_balance(r, h).unwrap();
        let s = sf * s2;
        let a = area(r, h, s);
        let q = quadrature_area(r, h, s);
        prop_assert!((a - q).abs() <= 1e-8 * a, "r={} h={} s={} {} vs {}", r, h, s, a, q);
    }

    #[test]
    fn area_derivative_sign_matches_curvature(r in 0.1f64..2.0, hr in 0.01f64..0.37, sf in 0.02f64..4.0) {
        let h = hr * r;
        let (s1, s2) = solve_balance(r, h).unwrap();
        let s = sf * s2;
        prop_assume!((s - s1).abs() > 1e-3 * s2 && (s - s2).abs() > 1e-3 * s2);
        let d = 1e-6 * s;
        let slope = area(r, h, s + d) - area(r, h, s - d);
        prop_assume!(slope.abs() > 1e-12 * area(r, h, s));
        let sign = slope.partial_cmp(&0.0).unwrap();
        prop_assert_eq!(sign, curvature_sign(r, h, s));
    }

    #[test]
    fn profile_satisfies_ode(r in 0.1f64..2.0, h in 0.01f64..0.5, s in 0.1f64..20.0, zf in -0.9f64..0.9) {
        let z = zf * h;
        // Step balancing truncation (∝ s²dz²) against rounding (∝ 1/(s dz)²).
        let dz = (1e-2 * h).min(1e-2 / s);
        let f = |z: f64| profile(r, h, s, z).unwrap();
        let second = (f(z + dz) - 2.0 * f(z) + f(z - dz)) / (dz * dz);
        let expect = s * s * f(z);
        prop_assert!((second - expect).abs() <= 1e-4 * expect.abs().max(1e-8));
        prop_assert!((f(h) - r).abs() == 0.0 && (f(-h) - r).abs() == 0.0);
    }

    #[test]
    fn roots_separate_by_convexity(r in 0.1f64..2.0, hr in 0.01f64..0.6) {
        let h = hr * r;
        let (s1, s2) = solve_balance(r, h).unwrap();
        prop_assert!(s1 < s2);
        for s in [s1, s2] {
            prop_assert!(balance(r, h, s).abs() <= 1e-10 * (r * s).max(1.0));
        }
        prop_assert!(r <= h * (s2 * h).sinh() * (1.0 + 1e-12));
        for i in 1..50 {
            let inside = s1 + (s2 - s1) * i as f64 / 50.0;
            prop_assert!(balance(r, h, inside) > 0.0);
            let below = s1 * i as f64 / 50.0;
            prop_assert!(balance(r, h, below) < 0.0);
            let above = s2 * (1.0 + i as f64 / 10.0);
            prop_assert!(balance(r, h, above) < 0.0);
        }
    }
}
