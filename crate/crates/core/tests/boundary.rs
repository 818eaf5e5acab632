use std::f64::consts::PI;

use graph_willmore::analytic::{Analytic, AnalyticField};
use graph_willmore::boundary::{
    boundary_norms, gauss_bonnet_residual, geodesic_curvature, normal_curvature, BoundaryCurve, BoundaryTrace,
};
use graph_willmore::graphgeom::geometry_bundle;
use graph_willmore::grid::{DiscreteDomain, DomainSpec, ScalarField, Shape};
use proptest::prelude::*;

fn disk(radius: f64, h: f64) -> DiscreteDomain {
    DomainSpec::new(Shape::Disk { center: [0.0; 2], radius }, h).polar(None).build().unwrap()
}

fn residual(d: &DiscreteDomain, u: &ScalarField) -> f64 {
    let curve = BoundaryCurve::of_domain(d).unwrap();
    let trace = BoundaryTrace::from_field(d, u, &curve);
    let kg = geodesic_curvature(&trace, &curve);
    let b = geometry_bundle(u, d).unwrap();
    gauss_bonnet_residual(d, &b, &kg, curve.euler_characteristic)
}

#[test]
fn flat_unit_disk_boundary_is_a_geodesic_circle() {
    let d = disk(1.0, 1.0 / 32.0);
    let u = ScalarField::zeros(d.len());
    let curve = BoundaryCurve::of_domain(&d).unwrap();
    let trace = BoundaryTrace::from_field(&d, &u, &curve);
    let kg = geodesic_curvature(&trace, &curve);
    assert!(kg.kappa_g[0].iter().all(|&k| (k - 1.0).abs() < 1e-12));
    assert!((kg.total - 2.0 * PI).abs() < 1e-12);
    assert!(residual(&d, &u) < 1e-12);
    let kn = normal_curvature(&trace, &curve, 1e-12).unwrap();
    assert!(kn[0].iter().all(|&k| k == 0.0));
}

#[test]
fn sphere_cap_latitude_circle() {
    let cap = Analytic::unit_sphere_cap();
    let mut res = Vec::new();
    for n in [32.0, 64.0, 128.0] {
        let h = 1.0 / n;
        let d = disk(0.5, h);
        let u = cap.sample(&d);
        let curve = BoundaryCurve::of_domain(&d).unwrap();
        let trace = BoundaryTrace::with_data(&d, &u, &curve, &cap);
        let kg = geodesic_curvature(&trace, &curve);
        let s3 = 3f64.sqrt();
        assert!(kg.kappa_g[0].iter().all(|&k| (k - s3).abs() < 10.0 * h * h), "h={}", h);
        assert!((kg.total - s3 * PI).abs() < 30.0 * h * h);
        let kn = normal_curvature(&trace, &curve, 1e-12).unwrap();
        assert!(kn[0].iter().all(|&k| (k + 1.0).abs() < 10.0 * h * h));
        let b = geometry_bundle(&u, &d).unwrap();
        res.push(gauss_bonnet_residual(&d, &b, &kg, 1));
    }
    assert!(res[0] > res[1] && res[1] > res[2] && res[2] < 1e-3, "{:?}", res);
}

#[test]
fn flat_annulus_has_zero_total_geodesic_curvature() {
    let d = DomainSpec::new(Shape::Annulus { center: [0.0; 2], inner: 0.25, outer: 1.0 }, 1.0 / 32.0)
        .polar(None)
        .build()
        .unwrap();
    let curve = BoundaryCurve::of_domain(&d).unwrap();
    assert_eq!(curve.euler_characteristic, 0);
    assert_eq!(curve.components.len(), 2);
    let u = ScalarField::zeros(d.len());
    let kg = geodesic_curvature(&BoundaryTrace::from_field(&d, &u, &curve), &curve);
    assert!(kg.total.abs() < 1e-12);
    assert!(residual(&d, &u) < 1e-12);
}

#[test]
fn cartesian_disk_traces_converge() {
    let cap = Analytic::unit_sphere_cap();
    let mut errs = Vec::new();
    for n in [32.0, 64.0, 128.0] {
        let d = DomainSpec::new(Shape::Disk { center: [0.0; 2], radius: 0.5 }, 1.0 / n).build().unwrap();
        let u = cap.sample(&d);
        let curve = BoundaryCurve::of_domain(&d).unwrap();
        let trace = BoundaryTrace::with_data(&d, &u, &curve, &cap);
        let e = trace.components[0].u_nu.iter().map(|v| (v + 1.0 / 3f64.sqrt()).abs()).fold(0.0, f64::max);
        errs.push(e);
    }
    assert!(errs[0] / errs[2] > 6.0, "{:?}", errs);
}

#[test]
fn boundary_norms_of_sine_trace() {
    let d = disk(1.0, 1.0 / 64.0);
    let phi = Analytic::Affine { a: 0.0, b: 1.0, c: 0.0 };
    let u = phi.sample(&d);
    let curve = BoundaryCurve::of_domain(&d).unwrap();
    let (p, k) = boundary_norms(&BoundaryTrace::with_data(&d, &u, &curve, &phi), &curve);
    assert!((p - 12.0).abs() < 1e-3, "{}", p);
    assert!((k - 2.0 * PI).abs() < 1e-12);
    let (p, k) = boundary_norms(&BoundaryTrace::from_field(&d, &u, &curve), &curve);
    assert!((p - 12.0).abs() < 1e-3 && (k - 2.0 * PI).abs() < 1e-12, "{}", p);
    let (p, _) = boundary_norms(&BoundaryTrace::from_field(&d, &ScalarField::zeros(d.len()), &curve), &curve);
    assert_eq!(p, 0.0);
}

#[test]
fn ellipse_total_turning() {
    let e = BoundaryCurve::ellipse([0.0; 2], 2.0, 1.0, 512);
    let curve = BoundaryCurve::from_components(vec![e]);
    let zero = vec![vec![0.0; curve.components[0].len()]];
    let (p, k) = boundary_norms(&BoundaryTrace::of_data(&curve, &Analytic::Zero, &zero), &curve);
    assert_eq!(p, 0.0);
    assert!((k - 2.0 * PI).abs() < 1e-6);
}

#[test]
fn geodesic_curvature_ignores_interior_values() {
    let d = disk(1.0, 1.0 / 32.0);
    let f = Analytic::random_fourier(3, 4, 3.0, 0.4);
    let u = f.sample(&d);
    let curve = BoundaryCurve::of_domain(&d).unwrap();
    let layers = d.boundary_layers(6);
    let mut v = u.clone();
    for k in 0..d.len() {
        if layers[k] > 5 {
            v.values_mut()[k] += 0.3 * (k as f64).sin();
        }
    }
    let a = geodesic_curvature(&BoundaryTrace::from_field(&d, &u, &curve), &curve);
    let b = geodesic_curvature(&BoundaryTrace::from_field(&d, &v, &curve), &curve);
    assert_eq!(a.kappa_g, b.kappa_g);
}

#[test]
fn mismatched_trace_is_a_precondition_error() {
    let d = disk(1.0, 1.0 / 16.0);
    let u = d.sample(|_| 0.1);
    let curve = BoundaryCurve::of_domain(&d).unwrap();
    let trace = BoundaryTrace::with_data(&d, &u, &curve, &Analytic::Zero);
    assert!(normal_curvature(&trace, &curve, 1e-8).is_err());
}

#[test]
fn rectangles_have_no_smooth_boundary_curve() {
    let d = DomainSpec::new(Shape::Rectangle { min: [0.0; 2], max: [1.0, 1.0] }, 0.125).build().unwrap();
    assert!(BoundaryCurve::of_domain(&d).is_err());
}

#[test]
fn boundary_csv_columns() {
    let d = disk(1.0, 1.0 / 16.0);
    let u = ScalarField::zeros(d.len());
    let curve = BoundaryCurve::of_domain(&d).unwrap();
    let trace = BoundaryTrace::from_field(&d, &u, &curve);
    let kg = geodesic_curvature(&trace, &curve);
    let kn = normal_curvature(&trace, &curve, 1e-12).unwrap();
    let mut buf = Vec::new();
    graph_willmore::boundary::write_csv(&mut buf, &curve, &trace, &kg, &kn).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("s,kappa,phi,dphi,d2phi,u_nu,kappa_g,kappa_N\n"));
    assert_eq!(text.lines().count(), curve.components[0].len() + 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn geodesic_curvature_bound_holds(seed in 0u64..10_000, amp in 0.05f64..2.0, annulus in any::<bool>()) {
        let shape = if annulus {
            Shape::Annulus { center: [0.0; 2], inner: 0.3, outer: 1.0 }
        } else {
            Shape::unit_disk()
        };
        let d = DomainSpec::new(shape, 1.0 / 32.0).polar(None).build().unwrap();
        let f = Analytic::random_fourier(seed, 5, 4.0, amp);
        let curve = BoundaryCurve::of_domain(&d).unwrap();
        let trace = BoundaryTrace::with_data(&d, &f.sample(&d), &curve, &f);
        let kg = geodesic_curvature(&trace, &curve);
        prop_assert!(kg.total_abs <= kg.bound_rhs + curve.max_ds());
    }
}
