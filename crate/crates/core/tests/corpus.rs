use std::f64::consts::{E, PI};

use graph_willmore::analytic::AnalyticField;
use graph_willmore::corpus::*;
use graph_willmore::energy::willmore_w0;
use graph_willmore::graphgeom::geometry_bundle;
use graph_willmore::grid::{DomainSpec, Excision};
use graph_willmore::relax::l1_distance;
use graph_willmore::Error;
use proptest::prelude::*;

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

/// ∫_a^b ∫_0^{2π} f(r cos θ, r sin θ) r dθ dr; the θ rule is exact for
/// trigonometric polynomials of degree < 32.
fn polar_integral(f: &dyn Fn([f64; 2]) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let ring = |r: f64| {
        let n = 32;
        (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).map(|t| f([r * t.cos(), r * t.sin()])).sum::<f64>()
            * (2.0 * PI / n as f64)
            * r
    };
    simpson(&ring, a, b, tol)
}

fn frob_sq(h: [[f64; 2]; 2]) -> f64 {
    h[0][0] * h[0][0] + 2.0 * h[0][1] * h[0][1] + h[1][1] * h[1][1]
}

#[test]
fn log_log_linear_spot_value() {
    let f = ExampleField::log_log_linear(1.0);
    let r = (-E).exp();
    assert!((f.value([r, 0.0]) - r).abs() < 1e-15);
    let f = ExampleField::log_log_linear(0.25);
    assert!((f.value([r, 0.0]) - 0.25 * r).abs() < 1e-15);
}

#[test]
fn radial_k_spot_value() {
    let f = ExampleField::radial_k(3).unwrap();
    assert!((f.value([0.875, 0.0]) - 0.5).abs() < 1e-15);
    assert!((f.value([0.0, 1.125]) + 0.5).abs() < 1e-15);
    assert_eq!(f.value([0.2, 0.1]), 1.0);
    assert_eq!(f.value([1.9, 0.0]), -1.0);
}

#[test]
fn sqrt_log_spot_values_and_partials() {
    let f = ExampleField::sqrt_log();
    let t = (-1.0f64).exp();
    assert!((f.value([t, 0.0]) - t).abs() < 1e-15);
    let g = f.gradient([t, 0.0]);
    assert!((g[0] - 0.5).abs() < 1e-14);
    assert!(g[1].abs() < 1e-15);
    // Closed-form partials at a generic point.
    let p: [f64; 2] = [0.11, -0.07];
    let r = p[0].hypot(p[1]);
    let l = -r.ln();
    let ux = l.sqrt() - p[0] * p[0] / (2.0 * r * r) / l.sqrt();
    let uy = -p[0] * p[1] / (2.0 * r * r) / l.sqrt();
    let g = f.gradient(p);
    assert!((g[0] - ux).abs() < 1e-13 && (g[1] - uy).abs() < 1e-13);
}

#[test]
fn parameter_errors() {
    for k in [0, 1, 2, 4, 6] {
        assert!(matches!(ExampleField::radial_k(k), Err(Error::Parameter(_))));
        assert!(matches!(ExampleField::radial_k_cylinder(k, 1.0), Err(Error::Parameter(_))));
    }
    assert!(ExampleField::radial_k(5).is_ok());
    assert!(matches!(ExampleField::radial_k_cylinder(3, -1.0), Err(Error::Parameter(_))));
    for id in ["logloglinear", "radial_k", "radial_k_cylinder", "sqrtlog"] {
        assert_eq!(ExampleId::parse(id).unwrap().as_str(), id);
    }
    assert!(ExampleId::parse("nope").is_err());
}

#[test]
fn inverse_profile_is_polynomial() {
    for k in [3u32, 5, 7] {
        let f = ExampleField::radial_k(k).unwrap();
        for i in 1..200 {
            let r = 0.75 + 0.5 * i as f64 / 200.0;
            let h = f.profile(r)[0];
            assert!((1.0 - h.powi(k as i32) - r).abs() < 1e-14, "k={} r={}", k, r);
        }
    }
}

#[test]
fn incompatible_domain_is_rejected() {
    let d = DomainSpec::new(graph_willmore::grid::Shape::unit_disk(), 1.0 / 16.0).build().unwrap();
    assert!(matches!(build_example(&ExampleField::radial_k(3).unwrap(), &d), Err(Error::Precondition(_))));
    assert!(build_example(&ExampleField::sqrt_log(), &d).is_ok());
}

#[test]
fn singular_set_is_flagged() {
    let f = ExampleField::sqrt_log();
    let d = example_domain(&f, 1.0 / 16.0, 16, Excision::None).unwrap();
    let s = build_example(&f, &d).unwrap();
    assert_eq!(s.singular.iter().filter(|b| **b).count(), 1);
    for k in 0..d.len() {
        assert_eq!(s.singular[k], d.position(k) == [0.0, 0.0]);
        assert_eq!(s.gradient.get(k)[0].is_nan(), s.singular[k]);
        assert!(s.u.get(k).is_finite());
    }
}

#[test]
fn resolution_errors() {
    let f = ExampleField::sqrt_log();
    let h = 1.0 / 64.0;
    assert!(matches!(divergence_diagnostics(&f, h, 16, &[0.25, 0.05], 2.0), Err(Error::Resolution(_))));
    assert!(matches!(divergence_diagnostics(&f, h, 16, &[0.125, 0.25], 2.0), Err(Error::Config(_))));
    let g = ExampleField::radial_k(3).unwrap();
    assert!(matches!(mollified(&g, 5, 0.5, 1.0 / 64.0), Err(Error::Resolution(_))));
    assert!(mollified(&g, 3, 0.5, 1.0 / 64.0).is_ok());
    assert!(matches!(mollified(&g, 0, 0.5, 1.0 / 64.0), Err(Error::Precondition(_))));
}

#[test]
fn sqrt_log_excision_matches_radial_oracle() {
    let f = ExampleField::sqrt_log();
    let deltas = [0.25, 0.125, 0.0625];
    let rows = divergence_diagnostics(&f, 1.0 / 512.0, 16, &deltas, 2.0).unwrap();
    for i in 0..rows.len() {
        assert!(rows[i].w0.is_finite());
        if i > 0 {
            assert!(rows[i].hess_sq > rows[i - 1].hess_sq);
        }
    }
    for w in rows.windows(2).zip(deltas.windows(2)) {
        let (rw, dw) = w;
        let grid = rw[1].hess_sq - rw[0].hess_sq;
        let oracle = polar_integral(&|p| frob_sq(f.hessian(p)), dw[1], dw[0], 1e-10);
        assert!((grid - oracle).abs() < 5e-3 * oracle, "grid {} oracle {}", grid, oracle);
    }
}

#[test]
fn radial_k_collars_match_radial_oracle() {
    let f = ExampleField::radial_k(3).unwrap();
    let m = 512.0;
    let h = 2.0 / (2.0 * m + 1.0);
    let deltas = [64.0 * h, 32.0 * h, 16.0 * h];
    let p32 = divergence_diagnostics(&f, h, 8, &deltas, 1.5).unwrap();
    let p1 = divergence_diagnostics(&f, h, 8, &deltas, 1.0).unwrap();
    let radial = |p: f64| move |r: f64| f.profile(r)[1].abs().powf(p) * 2.0 * PI * r;
    let mut inc32 = Vec::new();
    let mut inc1 = Vec::new();
    for i in 1..deltas.len() {
        let (a, b) = (deltas[i], deltas[i - 1]);
        for (rows, p, incs) in [(&p32, 1.5, &mut inc32), (&p1, 1.0, &mut inc1)] {
            let g = radial(p);
            let oracle = simpson(&g, 1.0 - b, 1.0 - a, 1e-12) + simpson(&g, 1.0 + a, 1.0 + b, 1e-12);
            let grid = rows[i].grad_p - rows[i - 1].grad_p;
            assert!((grid - oracle).abs() < 2e-2 * oracle, "p={} grid {} oracle {}", p, grid, oracle);
            incs.push(grid);
        }
    }
    // p = 3/2: increments do not shrink; p = 1: they halve like δ^{1/3}.
    assert!(inc32[1] >= 0.99 * inc32[0], "{:?}", inc32);
    assert!(inc1[1] < 0.85 * inc1[0], "{:?}", inc1);
}

#[test]
fn mollified_radial_k_converges_monotonically() {
    let f = ExampleField::radial_k(3).unwrap();
    let h = 2.0 / 1025.0;
    let d = example_domain(&f, h, 8, Excision::None).unwrap();
    let limit = build_example(&f, &d).unwrap().u;
    let js: Vec<u32> = (1..=6).collect();
    let seq = mollified_sequence(&f, &d, 0.5, &js).unwrap();
    let mut prev = f64::INFINITY;
    for (j, u) in js.iter().zip(&seq) {
        let a = mollified(&f, *j, 0.5, h).unwrap();
        let grid = l1_distance(&d, u, &limit).unwrap();
        let oracle = simpson(&|r| (a.profile(r)[0] - f.profile(r)[0]).abs() * 2.0 * PI * r, 0.0, 2.0, 1e-12);
        assert!((grid - oracle).abs() < 0.05 * oracle + 1e-4, "j={} grid {} oracle {}", j, grid, oracle);
        assert!(grid < prev);
        prev = grid;
        for k in 0..d.len() {
            if d.on_boundary(k) {
                assert!((u.get(k) + 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn point_examples_keep_zero_boundary_data() {
    for f in [ExampleField::sqrt_log(), ExampleField::log_log_linear(1.0)] {
        let d = example_domain(&f, 1.0 / 128.0, 16, Excision::None).unwrap();
        let seq = mollified_sequence(&f, &d, f.default_sigma0(), &[1, 2, 3]).unwrap();
        for u in &seq {
            for k in 0..d.len() {
                if d.on_boundary(k) {
                    assert!(u.get(k).abs() < 1e-14);
                }
            }
            assert!(u.values().iter().all(|v| v.is_finite()));
        }
    }
}

#[test]
fn wide_smoothing_gives_cap_interpolant() {
    for f in [ExampleField::sqrt_log(), ExampleField::radial_k(3).unwrap(), ExampleField::radial_k_cylinder(3, 1.0).unwrap()] {
        let a = mollified(&f, 1, 4.0 * f.max_smoothing(), 1.0 / 64.0).unwrap();
        assert!(a.is_cap());
        let d = example_domain(&f, 1.0 / 64.0, 16, Excision::None).unwrap();
        let u = a.sample(&d);
        let w = willmore_w0(&d, &geometry_bundle(&u, &d).unwrap());
        assert!(w.is_finite());
        let target = build_example(&f, &d).unwrap().u;
        for k in 0..d.len() {
            if d.on_boundary(k) {
                assert!((u.get(k) - target.get(k)).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn cylinder_ramps_have_bounded_energy_and_steepen() {
    let f = ExampleField::radial_k_cylinder(3, 1.0).unwrap();
    let h = 2.0 / 2049.0;
    let d = example_domain(&f, h, 8, Excision::None).unwrap();
    let js: Vec<u32> = (2..=7).collect();
    let seq = mollified_sequence(&f, &d, 0.5, &js).unwrap();
    let mut w0 = Vec::new();
    let mut steep = Vec::new();
    let mut l1grad = Vec::new();
    for u in &seq {
        let b = geometry_bundle(u, &d).unwrap();
        w0.push(willmore_w0(&d, &b));
        steep.push(b.gradient.max_norm());
        l1grad.push(d.integrate_with(|k| {
            let g = b.gradient.get(k);
            g[0].hypot(g[1])
        }));
    }
    let (lo, hi) = w0.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &w| (a.min(w), b.max(w)));
    assert!(hi < 1.2 * lo, "{:?}", w0);
    assert!(steep.windows(2).all(|s| s[1] > 1.3 * s[0]), "{:?}", steep);
    assert!(steep[5] > 10.0 * steep[0], "{:?}", steep);
    let (glo, ghi) = l1grad.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &w| (a.min(w), b.max(w)));
    assert!(ghi < 1.1 * glo, "{:?}", l1grad);
}

#[test]
fn ramp_profile_is_a_smooth_monotone_graph() {
    let f = ExampleField::radial_k_cylinder(3, 1.0).unwrap();
    let a = mollified(&f, 4, 0.5, 1e-3).unwrap();
    let mut prev = f64::INFINITY;
    for i in 0..=4000 {
        let r = 0.5 + i as f64 / 4000.0;
        let p = a.profile(r);
        assert!(p[0] <= prev + 1e-12);
        assert!(p.iter().all(|v| v.is_finite()));
        prev = p[0];
        // Derivatives agree with difference quotients of the values.
        let e = 1e-6;
        let fd = (a.profile(r + e)[0] - a.profile(r - e)[0]) / (2.0 * e);
        assert!((fd - p[1]).abs() < 1e-4 * (1.0 + p[1].abs()), "r={} {} {}", r, fd, p[1]);
    }
}

fn example_strategy() -> impl Strategy<Value = ExampleField> {
    prop_oneof![
        (0.1f64..2.0).prop_map(ExampleField::log_log_linear),
        Just(ExampleField::sqrt_log()),
        prop_oneof![Just(3u32), Just(5), Just(7)].prop_map(|k| ExampleField::radial_k(k).unwrap()),
        (0.2f64..2.0).prop_map(|j| ExampleField::radial_k_cylinder(3, j).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn analytic_derivatives_match_difference_quotients(f in example_strategy(), t in 0.0f64..6.3, s in 0.02f64..0.98) {
        let rmax = match f.shape() { graph_willmore::grid::Shape::Disk { radius, .. } => radius, _ => 1.0 };
        let r = s * rmax;
        prop_assume!((r - 1.0).abs() > 0.02 || matches!(f.singularity(), Singularity::Point { .. }));
        let p = [r * t.cos(), r * t.sin()];
        let e = 1e-5;
        let g = f.gradient(p);
        let hs = f.hessian(p);
        for i in 0..2 {
            let mut a = p;
            let mut b = p;
            a[i] += e;
            b[i] -= e;
            let fd = (f.value(a) - f.value(b)) / (2.0 * e);
            prop_assert!((fd - g[i]).abs() < 1e-5 * (1.0 + g[i].abs()), "{} vs {}", fd, g[i]);
            let ga = f.gradient(a);
            let gb = f.gradient(b);
            for j in 0..2 {
                let fd = (ga[j] - gb[j]) / (2.0 * e);
                prop_assert!((fd - hs[i][j]).abs() < 1e-4 * (1.0 + hs[i][j].abs()), "{} vs {}", fd, hs[i][j]);
            }
        }
    }

    #[test]
    fn mollified_profiles_stay_within_target_range(j in 1u32..6, r in 0.0f64..2.0) {
        let f = ExampleField::radial_k(3).unwrap();
        let a = mollified(&f, j, 0.5, 1e-3).unwrap();
        let v = a.profile(r)[0];
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
    }
}
