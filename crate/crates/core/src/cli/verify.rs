//! Invariant suite over the smooth corpus.

use std::f64::consts::PI;

use serde::Serialize;

use super::report::{fitted_order, GridInfo};
use crate::analytic::{Analytic, AnalyticField};
use crate::boundary::{gauss_bonnet_residual, geodesic_curvature, BoundaryCurve, BoundaryTrace};
use crate::energy::{
    bound_certificates, default_alpha_extension, gauss_energy_eg, helfrich_integrand_min, report_from_bundle,
    HelfrichParams,
};
use crate::graphgeom::{geometry_bundle, hessian_bound_check, GeometryBundle};
use crate::grid::{DiscreteDomain, DomainSpec, ScalarField, Shape};
use crate::minimize::DiscreteEnergy;
use crate::Result;

/// A named smooth field on its domain.
#[derive(Debug, Clone)]
pub struct CorpusField {
    pub name: &'static str,
    pub shape: Shape,
    pub field: Analytic,
}

/// The five smooth corpus fields; the two random ones depend on `seed`.
pub fn smooth_corpus(seed: u64) -> Vec<CorpusField> {
    vec![
        CorpusField { name: "flat_disk", shape: Shape::unit_disk(), field: Analytic::Zero },
        CorpusField {
            name: "sphere_cap",
            shape: Shape::Disk { center: [0.0; 2], radius: 0.5 },
            field: Analytic::unit_sphere_cap(),
        },
        CorpusField { name: "parabolic_cylinder", shape: Shape::unit_disk(), field: Analytic::parabolic_cylinder() },
        CorpusField { name: "fourier_disk", shape: Shape::unit_disk(), field: Analytic::random_fourier(seed, 5, 3.0, 0.5) },
        CorpusField {
            name: "fourier_annulus",
            shape: Shape::Annulus { center: [0.0; 2], inner: 0.3, outer: 1.0 },
            field: Analytic::random_fourier(seed.wrapping_add(1), 4, 3.0, 0.4),
        },
    ]
}

/// Flat annulus, used for the χ = 0 Gauss–Bonnet check.
pub fn flat_annulus() -> CorpusField {
    CorpusField { name: "flat_annulus", shape: Shape::Annulus { center: [0.0; 2], inner: 0.25, outer: 1.0 }, field: Analytic::Zero }
}

/// Exact W0 of the unit-sphere cap over the disk of radius ½.
pub fn cap_w0_exact() -> f64 {
    2.0 * PI * (1.0 - 3f64.sqrt() / 2.0)
}

/// One row of the pass/fail table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub field: String,
    pub h: f64,
    pub value: f64,
    pub tolerance: f64,
    /// Distance to failure; negative when the check fails.
    pub margin: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    fn upper(name: &'static str, field: &str, h: f64, value: f64, tolerance: f64) -> Self {
        let pass = value <= tolerance;
        Check { name, field: field.into(), h, value, tolerance, margin: tolerance - value, pass }
    }

    /// Passes when `value ≥ minimum`.
    fn at_least(name: &'static str, field: &str, h: f64, value: f64, minimum: f64) -> Self {
        Check { name, field: field.into(), h, value, tolerance: minimum, margin: value - minimum, pass: value >= minimum }
    }

    /// Passes when `margin ≥ 0`.
    fn nonnegative(name: &'static str, field: &str, h: f64, margin: f64) -> Self {
        Check { name, field: field.into(), h, value: margin, tolerance: 0.0, margin, pass: margin >= 0.0 }
    }
}

/// Parameters of the suite.
#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub resolutions: Vec<f64>,
    pub seed: u64,
    pub random_fields: usize,
}

pub fn polar_domain(shape: Shape, h: f64) -> Result<DiscreteDomain> {
    DomainSpec::new(shape, h).polar(None).build()
}

/// Largest absolute excess in the Hessian/second-form chain.
pub fn chain_excess(b: &GeometryBundle) -> (usize, f64, f64) {
    let r = hessian_bound_check(b, 0.0);
    let excess = (0..r.middle.len())
        .map(|k| (r.middle[k] - r.upper[k]).max(r.lower[k] - r.middle[k]))
        .fold(f64::NEG_INFINITY, f64::max);
    (r.violations, excess, r.tol)
}

/// Returns the Gauss–Bonnet residual and, for the cap, the W0 error.
fn field_checks(c: &CorpusField, d: &DiscreteDomain, out: &mut Vec<Check>) -> Result<(f64, f64)> {
    let h = d.h();
    let tol = 10.0 * h * h;
    let u = c.field.sample(d);
    let b = geometry_bundle(&u, d)?;
    out.push(Check::upper("a2_identity", c.name, h, b.a2_identity_residual(), tol));
    let (_, excess, _) = chain_excess(&b);
    out.push(Check::upper("hessian_chain", c.name, h, excess, tol));

    let curve = BoundaryCurve::of_domain(d)?;
    let trace = BoundaryTrace::with_data(d, &u, &curve, &c.field);
    let kg = geodesic_curvature(&trace, &curve);
    let gb = gauss_bonnet_residual(d, &b, &kg, curve.euler_characteristic);
    out.push(Check::upper("gauss_bonnet", c.name, h, gb, 1e-2));

    let (mut km, mut am, mut gm) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for gamma in [-1.0, 0.5, 2.0] {
        let rep = report_from_bundle(&u, d, &b, HelfrichParams { alpha: 0.0, h0: 0.0, gamma });
        let cert = bound_certificates(&rep, &curve, &trace, 1e-10)?;
        km = km.min(cert.kbound_margin());
        am = am.min(cert.abound_margin());
        gm = gm.min(cert.gamma_gap_margin());
    }
    out.push(Check::nonnegative("kbound", c.name, h, km));
    out.push(Check::nonnegative("abound", c.name, h, am));
    out.push(Check::nonnegative("gamma_gap", c.name, h, gm));
    if c.name == "flat_disk" {
        out.push(Check::upper("abound_tight", c.name, h, am.abs(), 1e-6));
    }

    let physical = HelfrichParams { alpha: 1.0, h0: 1.0, gamma: 0.5 };
    out.push(Check::nonnegative("helfrich_integrand", c.name, h, helfrich_integrand_min(&b, physical) + tol));

    let tg = report_from_bundle(&u, d, &b, HelfrichParams { alpha: 0.0, h0: 0.0, gamma: 0.0 }).total_gauss;
    let a1 = default_alpha_extension(d, &curve, &trace, 0.2)?;
    let a2 = default_alpha_extension(d, &curve, &trace, 0.35)?;
    let e1 = gauss_energy_eg(d, &u, &b, &curve, &trace, &a1, 1e-10)?;
    let e2 = gauss_energy_eg(d, &u, &b, &curve, &trace, &a2, 1e-10)?;
    out.push(Check::upper("eg_consistency", c.name, h, (e1 - tg).abs(), h));
    out.push(Check::upper("eg_extension_independence", c.name, h, (e1 - e2).abs(), h));

    if c.name == "sphere_cap" {
        let w0 = report_from_bundle(&u, d, &b, HelfrichParams { alpha: 0.0, h0: 0.0, gamma: 0.0 }).w0;
        let exact = cap_w0_exact();
        out.push(Check::upper("cap_w0", c.name, h, (w0 - exact).abs() / exact, 1e-2));
        return Ok((gb, (w0 - exact).abs()));
    }
    Ok((gb, f64::NAN))
}

/// Runs every invariant check; returns the table and the grids used.
pub fn run_suite(p: &SuiteParams) -> Result<(Vec<Check>, Vec<GridInfo>)> {
    let mut checks = Vec::new();
    let mut grids = Vec::new();
    let mut corpus = smooth_corpus(p.seed);
    corpus.push(flat_annulus());
    let finest = *p.resolutions.last().expect("at least one resolution");
    for c in &corpus {
        let (mut series, mut cap_err) = (Vec::new(), Vec::new());
        for &h in &p.resolutions {
            let d = polar_domain(c.shape, h)?;
            if c.name == "flat_disk" {
                grids.push(GridInfo::of(&d));
            }
            let mut rows = Vec::new();
            let (gb, e) = field_checks(c, &d, &mut rows)?;
            if c.name == "flat_annulus" {
                rows.retain(|r| r.name == "gauss_bonnet" || r.name == "abound");
            }
            checks.extend(rows);
            series.push(gb);
            cap_err.push(e);
        }
        if p.resolutions.len() >= 2 {
            if c.name == "sphere_cap" {
                let order = fitted_order(&p.resolutions, &cap_err).unwrap_or(f64::NAN);
                checks.push(Check::at_least("cap_w0_order", c.name, finest, order, 1.8));
            }
            // Roundoff-level residuals of flat fields need not decrease.
            let worst = series.windows(2).map(|w| if w[1] < w[0] || w[1] < 1e-12 { 0.0 } else { w[1] - w[0] }).fold(0.0, f64::max);
            checks.push(Check::upper("gauss_bonnet_refinement", c.name, finest, worst, 0.0));
        }
    }

    let h0 = p.resolutions[0];
    let d = polar_domain(Shape::unit_disk(), h0)?;
    let zero = ScalarField::zeros(d.len());
    let params = HelfrichParams { alpha: 0.0, h0: 0.0, gamma: 0.0 };
    let (_, g) = DiscreteEnergy::new(&d, params).value_and_gradient(&zero);
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    checks.push(Check::upper("flat_is_critical", "flat_disk", h0, gmax, 1e-12));

    let tol = 10.0 * h0 * h0;
    let (mut count, mut excess, mut a2res) = (0usize, f64::NEG_INFINITY, 0.0f64);
    for i in 0..p.random_fields {
        let f = Analytic::random_fourier(p.seed.wrapping_add(1000 + i as u64), 6, 5.0, 0.8);
        let b = geometry_bundle(&f.sample(&d), &d)?;
        let (_, e, _) = chain_excess(&b);
        if e > tol {
            count += 1;
        }
        excess = excess.max(e);
        a2res = a2res.max(b.a2_identity_residual());
    }
    if p.random_fields > 0 {
        let name = format!("random_fourier x{}", p.random_fields);
        checks.push(Check { name: "hessian_chain_random", field: name.clone(), h: h0, value: count as f64, tolerance: 0.0, margin: tol - excess, pass: count == 0 });
        checks.push(Check::upper("a2_identity_random", &name, h0, a2res, tol));
    }
    Ok((checks, grids))
}
