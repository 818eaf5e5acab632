use std::f64::consts::PI;

use graph_willmore::analytic::{Analytic, AnalyticField};
use graph_willmore::grid::{DiscreteDomain, DomainSpec, Excision, NodeClass, Shape};

fn unit_square(h: f64) -> DiscreteDomain {
    DomainSpec::new(Shape::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] }, h).build().unwrap()
}

fn domains(h: f64) -> Vec<DiscreteDomain> {
    vec![
        unit_square(h),
        DomainSpec::new(Shape::unit_disk(), h).build().unwrap(),
        DomainSpec::new(Shape::unit_disk(), h).polar(None).build().unwrap(),
        DomainSpec::new(Shape::Annulus { center: [0.0; 2], inner: 0.25, outer: 1.0 }, h).polar(None).build().unwrap(),
        DomainSpec::new(Shape::Annulus { center: [0.1, 0.0], inner: 0.3, outer: 1.0 }, h).build().unwrap(),
    ]
}

/// Max error of the discrete gradient and Hessian against the analytic ones.
fn derivative_errors(d: &DiscreteDomain, f: &Analytic, interior_only: bool) -> (f64, f64) {
    let u = f.sample(d);
    let g = d.gradient(&u);
    let hs = d.hessian(&u);
    let (mut eg, mut eh) = (0.0f64, 0.0f64);
    for k in 0..d.len() {
        if interior_only && d.class(k) != NodeClass::Interior {
            continue;
        }
        let p = d.position(k);
        let ga = f.gradient(p);
        let ha = f.hessian(p);
        eg = eg.max((g.x()[k] - ga[0]).abs()).max((g.y()[k] - ga[1]).abs());
        let t = hs.get(k);
        for i in 0..2 {
            for j in 0..2 {
                eh = eh.max((t[i][j] - ha[i][j]).abs());
            }
        }
    }
    (eg, eh)
}

#[test]
fn constant_and_affine_fields_are_exact() {
    for d in domains(1.0 / 16.0) {
        let c = Analytic::Constant { c: 3.5 };
        let (eg, eh) = derivative_errors(&d, &c, false);
        assert!(eg < 1e-12 && eh < 1e-9, "{:?}: {} {}", d.spec().shape, eg, eh);
        let a = Analytic::Affine { a: 0.7, b: -1.3, c: 0.2 };
        let (eg, eh) = derivative_errors(&d, &a, false);
        assert!(eg < 1e-11 && eh < 1e-8, "{:?}: {} {}", d.spec().shape, eg, eh);
    }
}

#[test]
fn quadratics_are_exact() {
    let q = Analytic::Quadratic { c: 0.1, b: [0.4, -0.2], a: [[1.5, -0.7], [-0.7, 0.3]] };
    for d in domains(1.0 / 16.0) {
        // Ghost values are exact on quadratics only where a lattice line holds
        // enough nodes; polar and rectangular domains have that everywhere.
        let every = d.stencil_fallbacks() == 0;
        let (eg, eh) = derivative_errors(&d, &q, !every);
        assert!(eg < 1e-10 && eh < 1e-7, "{:?}: {} {}", d.spec().shape, eg, eh);
    }
}

#[test]
fn mixed_monomial_hessian_is_exact() {
    let xy = Analytic::Quadratic { c: 0.0, b: [0.0; 2], a: [[0.0, 1.0], [1.0, 0.0]] };
    let d = unit_square(1.0 / 32.0);
    let hs = d.hessian(&xy.sample(&d));
    for k in 0..d.len() {
        assert!((hs.xy()[k] - 1.0).abs() < 1e-9);
        assert!(hs.xx()[k].abs() < 1e-9 && hs.yy()[k].abs() < 1e-9);
    }
}

#[test]
fn square_of_radius_gradient_on_unit_square() {
    let f = Analytic::Quadratic { c: 0.0, b: [0.0; 2], a: [[2.0, 0.0], [0.0, 2.0]] };
    let d = unit_square(1.0 / 64.0);
    let (eg, _) = derivative_errors(&d, &f, true);
    assert!(eg < 1e-10, "{}", eg);
}

#[test]
fn sphere_cap_hessian_converges_at_second_order() {
    let cap = Analytic::unit_sphere_cap();
    for polar in [false, true] {
        let mut errs = Vec::new();
        for n in [32.0, 64.0, 128.0] {
            let mut spec = DomainSpec::new(Shape::Disk { center: [0.0; 2], radius: 0.5 }, 1.0 / n);
            if polar {
                spec = spec.polar(None);
            }
            // Cartesian ghost points sit at irregular distances from the
            // circle, so the clean rate is measured on interior nodes there.
            let (_, eh) = derivative_errors(&spec.build().unwrap(), &cap, !polar);
            errs.push(eh);
        }
        // The masked Cartesian disk meets the circle at irregular offsets, so
        // its ratio fluctuates around 4; the polar lattice is clean.
        let min_ratio = if polar { 3.5 } else { 3.0 };
        for w in errs.windows(2) {
            assert!(w[0] / w[1] > min_ratio, "polar={} errors {:?}", polar, errs);
        }
    }
}

#[test]
fn smooth_field_refinement_ratio_exceeds_three_and_a_half() {
    let f = Analytic::random_fourier(42, 6, 5.0, 0.5);
    let e: Vec<f64> = [16.0, 32.0, 64.0].iter().map(|n| derivative_errors(&unit_square(1.0 / n), &f, false).1).collect();
    assert!(e[0] / e[1] > 3.5 && e[1] / e[2] > 3.5, "{:?}", e);
}

#[test]
fn quadrature_areas() {
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let d = DomainSpec::new(Shape::unit_disk(), h).build().unwrap();
        let one = d.sample(|_| 1.0);
        assert!((d.integrate(&one) - PI).abs() < 2.0 * h, "cartesian disk {}", d.integrate(&one));
        let d = DomainSpec::new(Shape::unit_disk(), h).polar(None).build().unwrap();
        assert!((d.integrate(&d.sample(|_| 1.0)) - PI).abs() < 1e-12);
        let r2 = d.sample(|p| p[0] * p[0] + p[1] * p[1]);
        assert!((d.integrate(&r2) - PI / 2.0).abs() < h * h);
    }
    let d = DomainSpec::new(Shape::Annulus { center: [0.0; 2], inner: 0.25, outer: 1.0 }, 1.0 / 64.0)
        .polar(None)
        .build()
        .unwrap();
    assert!((d.integrate(&d.sample(|_| 1.0)) - PI * (1.0 - 0.0625)).abs() < 1e-12);
    let d = DomainSpec::new(Shape::Annulus { center: [0.0; 2], inner: 0.25, outer: 1.0 }, 1.0 / 64.0).build().unwrap();
    assert!((d.integrate(&d.sample(|_| 1.0)) - PI * (1.0 - 0.0625)).abs() < 1.0 / 64.0);
    let s = DomainSpec::new(Shape::Annulus { center: [0.1, 0.0], inner: 0.3, outer: 1.0 }, 1.0 / 64.0).build().unwrap();
    assert!((s.integrate(&s.sample(|_| 1.0)) - PI * 0.91).abs() < 1.0 / 64.0);
}

#[test]
fn excision_removes_nodes_and_area() {
    let delta = 0.125;
    let d = DomainSpec::new(Shape::unit_disk(), 1.0 / 64.0)
        .polar(None)
        .excise(Excision::Point { center: [0.0; 2], radius: delta })
        .build()
        .unwrap();
    assert!(d.positions().iter().all(|p| p[0].hypot(p[1]) >= delta - 1e-12));
    let area = d.integrate(&d.sample(|_| 1.0));
    assert!((area - d.analytic_area()).abs() < 1e-12);
    assert!((area - PI * (1.0 - delta * delta)).abs() < 1e-12);
    let c = DomainSpec::new(Shape::unit_disk(), 1.0 / 64.0)
        .excise(Excision::Point { center: [0.0; 2], radius: delta })
        .build()
        .unwrap();
    assert!((c.integrate(&c.sample(|_| 1.0)) - c.analytic_area()).abs() < 2.0 / 64.0);
}

#[test]
fn invalid_specs_are_configuration_errors() {
    assert!(DomainSpec::new(Shape::unit_disk(), -0.1).build().is_err());
    assert!(DomainSpec::new(Shape::unit_disk(), 1.5).build().is_err());
    assert!(DomainSpec::new(Shape::Rectangle { min: [0.0; 2], max: [1.0, 1.0] }, 0.1).polar(None).build().is_err());
    assert!(DomainSpec::new(Shape::unit_disk(), 0.1).polar(Some(12)).build().is_err());
    assert!(DomainSpec::new(Shape::Rectangle { min: [0.0; 2], max: [1.0, 1.0] }, 0.3).build().is_err());
}

#[test]
fn field_csv_has_header_and_rows() {
    let d = unit_square(0.25);
    let u = d.sample(|p| p[0]);
    let mut buf = Vec::new();
    d.write_csv(&mut buf, &[("u", u.values())]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,y,u,node_class");
    assert_eq!(text.lines().count(), d.len() + 1);
}
