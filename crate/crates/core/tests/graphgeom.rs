use graph_willmore::analytic::{Analytic, AnalyticField};
use graph_willmore::graphgeom::{geometry_bundle, hessian_bound_check};
use graph_willmore::grid::{DiscreteDomain, DomainSpec, NodeClass, ScalarField, Shape};
use proptest::prelude::*;

fn cap_disk(h: f64, polar: bool) -> DiscreteDomain {
    let spec = DomainSpec::new(Shape::Disk { center: [0.0; 2], radius: 0.5 }, h);
    if polar { spec.polar(None) } else { spec }.build().unwrap()
}

fn unit_square(h: f64) -> DiscreteDomain {
    DomainSpec::new(Shape::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] }, h).build().unwrap()
}

fn interior_max(d: &DiscreteDomain, f: impl Fn(usize) -> f64) -> f64 {
    (0..d.len()).filter(|&k| d.class(k) == NodeClass::Interior).map(f).fold(0.0, f64::max)
}

#[test]
fn flat_graph_has_no_curvature() {
    let d = cap_disk(1.0 / 32.0, true);
    let b = geometry_bundle(&ScalarField::zeros(d.len()), &d).unwrap();
    for k in 0..d.len() {
        assert_eq!(b.area_element.get(k), 1.0);
        assert_eq!(b.mean_curvature.get(k), 0.0);
        assert_eq!(b.gauss_curvature.get(k), 0.0);
        assert_eq!(b.a2.get(k), 0.0);
    }
}

#[test]
fn sphere_cap_curvatures_converge_at_second_order() {
    let cap = Analytic::unit_sphere_cap();
    for polar in [true, false] {
        let mut errs = Vec::new();
        for n in [32.0, 64.0, 128.0] {
            let h = 1.0 / n;
            let d = cap_disk(h, polar);
            let b = geometry_bundle(&cap.sample(&d), &d).unwrap();
            let e = interior_max(&d, |k| {
                (b.mean_curvature.get(k) + 2.0)
                    .abs()
                    .max((b.mean_curvature_nd.get(k) + 2.0).abs())
                    .max((b.gauss_curvature.get(k) - 1.0).abs())
                    .max((b.a2.get(k) - 2.0).abs())
            });
            assert!(e < 10.0 * h * h, "polar={} h={} err={}", polar, h, e);
            errs.push(e);
        }
        assert!(errs[0] / errs[2] > 10.0, "polar={} {:?}", polar, errs);
    }
}

#[test]
fn parabolic_cylinder_is_developable() {
    let f = Analytic::parabolic_cylinder();
    let h = 1.0 / 64.0;
    let d = unit_square(h);
    let b = geometry_bundle(&f.sample(&d), &d).unwrap();
    for k in 0..d.len() {
        let x = d.position(k)[0];
        let q = (1.0 + x * x).sqrt();
        assert!(b.gauss_curvature.get(k).abs() < 1e-9);
        assert!((b.mean_curvature_nd.get(k) - 1.0 / q.powi(3)).abs() < 1e-9);
        if d.class(k) == NodeClass::Interior {
            assert!((b.mean_curvature.get(k) - 1.0 / q.powi(3)).abs() < h * h);
        }
    }
}

#[test]
fn both_forms_agree_on_smooth_fields() {
    let f = Analytic::random_fourier(7, 5, 4.0, 0.3);
    let mut hd = Vec::new();
    for n in [16.0, 32.0, 64.0] {
        let h = 1.0 / n;
        let d = unit_square(h);
        let b = geometry_bundle(&f.sample(&d), &d).unwrap();
        assert!(b.a2_identity_residual() < 1e-10);
        hd.push((b.h_discrepancy, b.k_discrepancy));
    }
    assert!(hd[0].0 / hd[2].0 > 10.0 && hd[0].1 / hd[2].1 > 10.0, "{:?}", hd);
}

#[test]
fn sphere_cap_satisfies_inequality_chain_strictly() {
    let d = cap_disk(1.0 / 64.0, true);
    let b = geometry_bundle(&Analytic::unit_sphere_cap().sample(&d), &d).unwrap();
    let r = hessian_bound_check(&b, 0.0);
    assert_eq!(r.violations, 0);
    for k in 0..d.len() {
        if d.position(k) != [0.0, 0.0] {
            assert!(r.upper[k] > r.middle[k] && r.middle[k] > r.lower[k]);
        }
    }
}

#[test]
fn csv_dump_has_one_row_per_node() {
    let d = unit_square(0.25);
    let b = geometry_bundle(&d.sample(|p| p[0] * p[1]), &d).unwrap();
    let mut buf = Vec::new();
    b.write_csv(&d, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x,y,Q,w_x,w_y,H,H_nd,K,K_dw,A2,node_class\n"));
    assert_eq!(text.lines().count(), d.len() + 1);
}

#[test]
fn nan_input_is_rejected() {
    let d = unit_square(0.25);
    let mut u = ScalarField::zeros(d.len());
    u.values_mut()[3] = f64::NAN;
    assert!(geometry_bundle(&u, &d).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vertical_shift_leaves_geometry_unchanged(seed in 0u64..1000, shift in -64i32..64) {
        // Dyadic samples keep u + c exact, so the difference stencils see
        // identical inputs.
        let d = unit_square(1.0 / 16.0);
        let f = Analytic::random_fourier(seed, 4, 4.0, 0.5);
        let u = f.sample(&d).map(|v| (v * 1048576.0).round() / 1048576.0);
        let a = geometry_bundle(&u, &d).unwrap();
        let b = geometry_bundle(&u.map(|v| v + shift as f64), &d).unwrap();
        prop_assert_eq!(a.mean_curvature.values(), b.mean_curvature.values());
        prop_assert_eq!(a.gauss_curvature.values(), b.gauss_curvature.values());
        prop_assert_eq!(a.a2.values(), b.a2.values());
        prop_assert_eq!(a.area_element.values(), b.area_element.values());
    }

    #[test]
    fn pointwise_invariants_hold_for_random_fields(seed in 0u64..10_000, amp in 0.05f64..1.5) {
        let h = 1.0 / 16.0;
        let d = unit_square(h);
        let f = Analytic::random_fourier(seed, 6, 5.0, amp);
        let b = geometry_bundle(&f.sample(&d), &d).unwrap();
        for k in 0..d.len() {
            prop_assert!(b.area_element.get(k) >= 1.0);
            prop_assert!(b.w.get(k)[0].hypot(b.w.get(k)[1]) < 1.0);
            prop_assert!(b.a2.get(k) >= 0.0);
            let t = b.hessian.get(k);
            prop_assert_eq!(t[0][1], t[1][0]);
        }
        prop_assert!(b.a2_identity_residual() < 1e-9);
        prop_assert_eq!(hessian_bound_check(&b, 10.0 * h * h).violations, 0);
    }
}
