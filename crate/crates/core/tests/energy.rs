use std::f64::consts::PI;

use graph_willmore::analytic::{Analytic, AnalyticField};
use graph_willmore::boundary::{BoundaryCurve, BoundaryTrace};
use graph_willmore::energy::{
    apriori_ratio, bound_certificates, default_alpha_extension, full_report, gauss_energy_eg, helfrich,
    helfrich_integrand_min, report_from_bundle, willmore, willmore_absolutely_continuous, HelfrichParams,
};
use graph_willmore::graphgeom::geometry_bundle;
use graph_willmore::grid::{Cut, DiscreteDomain, DomainSpec, ScalarField, Shape};
use proptest::prelude::*;

const CAP_AREA: f64 = 0.841_787_214_476_933_2;

fn polar(shape: Shape, h: f64) -> DiscreteDomain {
    DomainSpec::new(shape, h).polar(None).build().unwrap()
}

fn cap_domain(h: f64) -> DiscreteDomain {
    polar(Shape::Disk { center: [0.0; 2], radius: 0.5 }, h)
}

fn params(alpha: f64, h0: f64, gamma: f64) -> HelfrichParams {
    HelfrichParams { alpha, h0, gamma }
}

#[test]
fn cap_area_constant() {
    assert!((CAP_AREA - 2.0 * PI * (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
}

#[test]
fn flat_disk_energies() {
    let d = polar(Shape::unit_disk(), 1.0 / 32.0);
    let r = full_report(&ScalarField::zeros(d.len()), &d, params(0.0, 0.0, 0.5), Some(&Analytic::Zero), 1e-12).unwrap();
    assert_eq!(r.w0, 0.0);
    assert_eq!(r.total_gauss, 0.0);
    assert!((r.area - PI).abs() < 1e-12);
    assert!((apriori_ratio(&r) - PI).abs() < 1e-12);
    let c = r.certificates.unwrap();
    assert_eq!(c.kbound_lhs, 0.0);
    assert!((c.kbound_rhs - 4.0 * PI).abs() < 1e-12);
    assert!(c.abound_margin().abs() < 1e-6 && c.abound_margin() > -1e-12, "{}", c.abound_margin());
}

#[test]
fn sphere_cap_energies_converge() {
    let cap = Analytic::unit_sphere_cap();
    let mut errs = Vec::new();
    for n in [32.0, 64.0, 128.0] {
        let h = 1.0 / n;
        let d = cap_domain(h);
        let r = full_report(&cap.sample(&d), &d, params(0.0, 0.0, 1.0), Some(&cap), 1e-12).unwrap();
        assert!((r.total_gauss - CAP_AREA).abs() < h * h);
        assert!((r.area - CAP_AREA).abs() < h * h);
        let c = r.certificates.unwrap();
        assert!((c.abound_lhs - 2.0 * CAP_AREA).abs() < 2.0 * h * h);
        assert!(c.gauss_bonnet_identity_residual < 2.0 * h * h);
        errs.push((r.w0 - CAP_AREA).abs());
    }
    assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{:?}", errs);
}

#[test]
fn w_gamma_and_helfrich_reduce_exactly() {
    let d = polar(Shape::unit_disk(), 1.0 / 32.0);
    let u = Analytic::random_fourier(11, 5, 3.0, 0.3).sample(&d);
    let b = geometry_bundle(&u, &d).unwrap();
    for gamma in [-0.7, 0.0, 0.3, 1.0] {
        let r = report_from_bundle(&u, &d, &b, params(0.0, 0.0, gamma));
        assert_eq!(r.w_gamma, r.w0 - gamma * r.total_gauss);
        assert_eq!(r.helfrich.value, r.w_gamma);
        assert_eq!(helfrich(&d, &b, params(0.0, 0.0, gamma)).value, r.w_gamma);
    }
}

#[test]
fn helfrich_closed_forms() {
    let d = polar(Shape::unit_disk(), 1.0 / 32.0);
    let b = geometry_bundle(&ScalarField::zeros(d.len()), &d).unwrap();
    let v = helfrich(&d, &b, params(1.0, 1.0, 0.0));
    assert!((v.value - 1.25 * PI).abs() < 1e-12);
    assert!(v.physical);
    let h = 1.0 / 128.0;
    let d = cap_domain(h);
    let cap = Analytic::unit_sphere_cap();
    let b = geometry_bundle(&cap.sample(&d), &d).unwrap();
    let v = helfrich(&d, &b, params(0.7, -2.0, 0.4));
    assert!((v.value - (0.7 - 0.4) * CAP_AREA).abs() < 10.0 * h * h, "{}", v.value);
    assert!(v.physical);
    assert!(!helfrich(&d, &b, params(0.7, -2.0, 0.5)).physical);
    assert!(!helfrich(&d, &b, params(-1.0, 0.0, 0.0)).physical);
}

#[test]
fn lemma_certificates_hold_on_trace_matching_fields() {
    let cases: Vec<(Shape, Analytic)> = vec![
        (Shape::Disk { center: [0.0; 2], radius: 0.5 }, Analytic::unit_sphere_cap()),
        (Shape::unit_disk(), Analytic::random_fourier(2, 5, 3.0, 0.5)),
        (Shape::unit_disk(), Analytic::parabolic_cylinder()),
        (Shape::Annulus { center: [0.0; 2], inner: 0.3, outer: 1.0 }, Analytic::random_fourier(9, 4, 3.0, 0.4)),
    ];
    for (shape, f) in cases {
        let d = polar(shape, 1.0 / 64.0);
        for gamma in [-1.0, 0.5, 2.0] {
            let r = full_report(&f.sample(&d), &d, params(0.0, 0.0, gamma), Some(&f), 1e-12).unwrap();
            let c = r.certificates.unwrap();
            assert!(c.kbound_margin() >= 0.0, "{:?}", c);
            assert!(c.abound_margin() >= 0.0, "{:?}", c);
            assert!(c.gamma_gap_margin() >= 0.0, "{:?}", c);
        }
    }
}

#[test]
fn certificates_require_matching_traces() {
    let d = polar(Shape::unit_disk(), 1.0 / 16.0);
    let u = d.sample(|_| 0.2);
    let curve = BoundaryCurve::of_domain(&d).unwrap();
    let trace = BoundaryTrace::with_data(&d, &u, &curve, &Analytic::Zero);
    let r = willmore(&u, &d, params(0.0, 0.0, 0.0)).unwrap();
    assert!(bound_certificates(&r, &curve, &trace, 1e-8).is_err());
}

#[test]
fn apriori_ratio_ensemble_is_bounded() {
    let d = polar(Shape::unit_disk(), 1.0 / 32.0);
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let f = Analytic::random_clamped_bump(seed, [0.0; 2], 1.0, 2.0);
        let r = willmore(&f.sample(&d), &d, params(0.0, 0.0, 0.0)).unwrap();
        worst = worst.max(apriori_ratio(&r));
    }
    assert!(worst.is_finite() && worst > 0.0, "{}", worst);
}

#[test]
fn gauss_energy_matches_total_gauss() {
    let cap = Analytic::unit_sphere_cap();
    let mut errs = Vec::new();
    for n in [32.0, 64.0, 128.0] {
        let h = 1.0 / n;
        let d = cap_domain(h);
        let u = cap.sample(&d);
        let b = geometry_bundle(&u, &d).unwrap();
        let curve = BoundaryCurve::of_domain(&d).unwrap();
        let trace = BoundaryTrace::with_data(&d, &u, &curve, &cap);
        let a = default_alpha_extension(&d, &curve, &trace, 0.2).unwrap();
        let eg = gauss_energy_eg(&d, &u, &b, &curve, &trace, &a, 1e-10).unwrap();
        errs.push((eg - CAP_AREA).abs());
        assert!(errs.last().unwrap() < &h);
    }
    assert!(errs[0] > errs[2]);
}

#[test]
fn gauss_energy_is_extension_independent() {
    for n in [32.0, 64.0] {
        let h = 1.0 / n;
        let d = polar(Shape::unit_disk(), h);
        let f = Analytic::random_fourier(5, 5, 3.0, 0.4);
        let u = f.sample(&d);
        let b = geometry_bundle(&u, &d).unwrap();
        let tg = report_from_bundle(&u, &d, &b, params(0.0, 0.0, 0.0)).total_gauss;
        let curve = BoundaryCurve::of_domain(&d).unwrap();
        let trace = BoundaryTrace::with_data(&d, &u, &curve, &f);
        let a1 = default_alpha_extension(&d, &curve, &trace, 0.2).unwrap();
        let a2 = default_alpha_extension(&d, &curve, &trace, 0.35).unwrap();
        let a3 = a1.zip_map(&d.sample(|p| (1.0 - p[0] * p[0] - p[1] * p[1]) * (3.0 * p[0]).sin()), |a, b| a + b);
        let e1 = gauss_energy_eg(&d, &u, &b, &curve, &trace, &a1, 1e-10).unwrap();
        let e2 = gauss_energy_eg(&d, &u, &b, &curve, &trace, &a2, 1e-10).unwrap();
        let e3 = gauss_energy_eg(&d, &u, &b, &curve, &trace, &a3, 1e-10).unwrap();
        assert!((e1 - tg).abs() < h && (e2 - e1).abs() < h && (e3 - e1).abs() < h, "{} {} {} {}", tg, e1, e2, e3);
        assert!(gauss_energy_eg(&d, &u, &b, &curve, &trace, &a1.map(|v| v + 0.1), 1e-6).is_err());
    }
}

#[test]
fn regular_part_energy() {
    let d = polar(Shape::unit_disk(), 1.0 / 32.0);
    let u = Analytic::random_fourier(1, 4, 3.0, 0.3).sample(&d);
    let r = willmore(&u, &d, params(0.0, 0.0, 0.0)).unwrap();
    assert_eq!(willmore_absolutely_continuous(&u, &d, None).unwrap(), r.w0);
    let cut = Cut::Circle { center: [0.0; 2], radius: 0.5 + 1.0 / 64.0 };
    assert!(willmore_absolutely_continuous(&u, &d, Some(cut)).is_err());
    let dc = DomainSpec::new(Shape::unit_disk(), 1.0 / 32.0).polar(None).with_cut(cut).build().unwrap();
    // A jump across the cut circle does not change the regular part.
    let base = Analytic::random_fourier(1, 4, 3.0, 0.3).sample(&dc);
    let inside = |k: usize| cut.level(dc.position(k)) < 0.0;
    let jump = |height: f64| {
        ScalarField::new((0..dc.len()).map(|k| base.get(k) + if inside(k) { height } else { 0.0 }).collect())
    };
    let w1 = willmore_absolutely_continuous(&jump(1.0), &dc, Some(cut)).unwrap();
    let w2 = willmore_absolutely_continuous(&jump(2.0), &dc, Some(cut)).unwrap();
    assert!((w1 - w2).abs() < 1e-10 * w1.max(1.0), "{} {}", w1, w2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn physical_helfrich_integrand_is_nonnegative(
        seed in 0u64..10_000,
        alpha in 0.0f64..2.0,
        gamma in 0.0f64..1.0,
        t in -1.0f64..1.0,
    ) {
        // H₀ on the boundary of the physical range scaled by t.
        let h0 = if gamma > 0.0 { t * (4.0 * alpha * (1.0 - gamma) / gamma).sqrt() } else { 3.0 * t };
        let p = params(alpha, h0, gamma);
        prop_assume!(p.is_physical());
        let h = 1.0 / 16.0;
        let d = DomainSpec::new(Shape::Rectangle { min: [0.0; 2], max: [1.0, 1.0] }, h).build().unwrap();
        let b = geometry_bundle(&Analytic::random_fourier(seed, 5, 4.0, 0.5).sample(&d), &d).unwrap();
        prop_assert!(helfrich_integrand_min(&b, p) >= -10.0 * h * h);
    }

    #[test]
    fn gamma_gap_bound_on_random_fields(seed in 0u64..10_000, gamma in -3.0f64..3.0) {
        let d = polar(Shape::unit_disk(), 1.0 / 32.0);
        let f = Analytic::random_fourier(seed, 5, 3.0, 0.5);
        let r = full_report(&f.sample(&d), &d, params(0.0, 0.0, gamma), Some(&f), 1e-12).unwrap();
        let c = r.certificates.unwrap();
        prop_assert!(c.gamma_gap_margin() >= 0.0);
        prop_assert!(c.kbound_margin() >= 0.0);
    }
}
