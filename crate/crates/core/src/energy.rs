//! Willmore, Gauss and Canham–Helfrich energies of graphs and the bound
//! certificates relating them to the boundary data.

use std::f64::consts::PI;

use serde::Serialize;

use crate::analytic::smootherstep;
use crate::boundary::{boundary_norms, sample_field, BoundaryCurve, BoundaryTrace};
use crate::graphgeom::{geometry_bundle, GeometryBundle};
use crate::grid::{Cut, DiscreteDomain, ScalarField, Shape};
use crate::{Error, Result};

/// Parameters of α∫Q + ¼∫(H−H₀)²Q − γ∫KQ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HelfrichParams {
    pub alpha: f64,
    pub h0: f64,
    pub gamma: f64,
}

impl HelfrichParams {
    /// α ≥ 0, 0 ≤ γ ≤ 1 and γH₀² ≤ 4α(1−γ).
    pub fn is_physical(&self) -> bool {
        self.alpha >= 0.0
            && (0.0..=1.0).contains(&self.gamma)
            && self.gamma * self.h0 * self.h0 <= 4.0 * self.alpha * (1.0 - self.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HelfrichValue {
    pub alpha: f64,
    pub h0: f64,
    pub gamma: f64,
    pub value: f64,
    pub physical: bool,
}

/// Lemma-type bound certificates; each inequality is `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificates {
    pub phi_w21: f64,
    pub kappa_l1: f64,
    pub euler_characteristic: i32,
    pub kbound_lhs: f64,
    pub kbound_rhs: f64,
    pub abound_lhs: f64,
    pub abound_rhs: f64,
    pub gamma_gap_lhs: f64,
    pub gamma_gap_rhs: f64,
    pub apriori_ratio: f64,
    /// |∫|A|²Q − (4W0 − 2∫KQ)|.
    pub gauss_bonnet_identity_residual: f64,
}

impl Certificates {
    pub fn kbound_margin(&self) -> f64 {
        self.kbound_rhs - self.kbound_lhs
    }

    pub fn abound_margin(&self) -> f64 {
        self.abound_rhs - self.abound_lhs
    }

    pub fn gamma_gap_margin(&self) -> f64 {
        self.gamma_gap_rhs - self.gamma_gap_lhs
    }
}

/// All energy components of one field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    /// ∫Q dx.
    pub area: f64,
    /// ¼∫H²Q dx with the pointwise (non-divergence) H.
    #[serde(rename = "willmore_H")]
    pub willmore_h: f64,
    /// ∫ det D²u / Q³ dx.
    pub total_gauss: f64,
    /// ¼∫(∇·(∇u/Q))² Q dx.
    #[serde(rename = "W0")]
    pub w0: f64,
    pub gamma: f64,
    #[serde(rename = "W_gamma")]
    pub w_gamma: f64,
    pub helfrich: HelfrichValue,
    /// ∫|A|²_g Q dx.
    pub a2_q: f64,
    pub sup_u: f64,
    pub certificates: Option<Certificates>,
}

/// ¼∫(H−H₀)²Q with the divergence-form H.
fn bending(domain: &DiscreteDomain, b: &GeometryBundle, h0: f64) -> f64 {
    domain.integrate_with(|k| {
        let d = b.mean_curvature.get(k) - h0;
        0.25 * d * d * b.area_element.get(k)
    })
}

/// ∫ det D²u / Q³ dx.
pub fn total_gauss(domain: &DiscreteDomain, b: &GeometryBundle) -> f64 {
    domain.integrate_with(|k| {
        let q = b.area_element.get(k);
        b.hessian.det_at(k) / (q * q * q)
    })
}

/// W0 = ¼∫(∇·(∇u/Q))²Q dx on the nodes of `domain`.
pub fn willmore_w0(domain: &DiscreteDomain, b: &GeometryBundle) -> f64 {
    bending(domain, b, 0.0)
}

/// Energy report without certificates.
pub fn willmore(u: &ScalarField, domain: &DiscreteDomain, params: HelfrichParams) -> Result<EnergyReport> {
    let b = geometry_bundle(u, domain)?;
    Ok(report_from_bundle(u, domain, &b, params))
}

pub fn report_from_bundle(u: &ScalarField, domain: &DiscreteDomain, b: &GeometryBundle, p: HelfrichParams) -> EnergyReport {
    let area = domain.integrate(&b.area_element);
    let w0 = willmore_w0(domain, b);
    let tg = total_gauss(domain, b);
    let willmore_h = domain.integrate_with(|k| 0.25 * b.mean_curvature_nd.get(k).powi(2) * b.area_element.get(k));
    let a2_q = domain.integrate_with(|k| b.a2.get(k) * b.area_element.get(k));
    EnergyReport {
        area,
        willmore_h,
        total_gauss: tg,
        w0,
        gamma: p.gamma,
        w_gamma: w0 - p.gamma * tg,
        helfrich: helfrich_from_parts(domain, b, p, area, tg),
        a2_q,
        sup_u: u.max_abs(),
        certificates: None,
    }
}

fn helfrich_from_parts(domain: &DiscreteDomain, b: &GeometryBundle, p: HelfrichParams, area: f64, tg: f64) -> HelfrichValue {
    let value = p.alpha * area + bending(domain, b, p.h0) - p.gamma * tg;
    HelfrichValue { alpha: p.alpha, h0: p.h0, gamma: p.gamma, value, physical: p.is_physical() }
}

/// α∫Q + ¼∫(H−H₀)²Q − γ∫KQ, flagged with whether the parameters are in
/// the physical range.
pub fn helfrich(domain: &DiscreteDomain, b: &GeometryBundle, p: HelfrichParams) -> HelfrichValue {
    let area = domain.integrate(&b.area_element);
    helfrich_from_parts(domain, b, p, area, total_gauss(domain, b))
}

/// Minimum over nodes of the pointwise integrand α + ¼(H−H₀)² − γK,
/// using the pointwise H so that H and K come from one shape operator.
pub fn helfrich_integrand_min(b: &GeometryBundle, p: HelfrichParams) -> f64 {
    (0..b.a2.len())
        .map(|k| {
            let d = b.mean_curvature_nd.get(k) - p.h0;
            p.alpha + 0.25 * d * d - p.gamma * b.gauss_curvature.get(k)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Evaluates the bound certificates for `u` with boundary traces `trace`.
/// Fails if u does not match φ on ∂Ω within `tol`.
pub fn bound_certificates(
    report: &EnergyReport,
    curve: &BoundaryCurve,
    trace: &BoundaryTrace,
    tol: f64,
) -> Result<Certificates> {
    let mismatch = trace.mismatch();
    if mismatch > tol {
        return Err(Error::Precondition(format!("u differs from φ on ∂Ω by {:e} (tolerance {:e})", mismatch, tol)));
    }
    let (phi_w21, kappa_l1) = boundary_norms(trace, curve);
    let chi = curve.euler_characteristic;
    let data = phi_w21 + kappa_l1;
    Ok(Certificates {
        phi_w21,
        kappa_l1,
        euler_characteristic: chi,
        kbound_lhs: report.total_gauss.abs(),
        kbound_rhs: data + 2.0 * PI * (chi as f64).abs(),
        abound_lhs: report.a2_q,
        abound_rhs: 4.0 * report.w0 + 2.0 * data - 4.0 * PI * chi as f64,
        gamma_gap_lhs: (report.w0 - report.w_gamma).abs(),
        gamma_gap_rhs: report.gamma.abs() * (data + 2.0 * PI * (chi as f64).abs()),
        apriori_ratio: apriori_ratio(report),
        gauss_bonnet_identity_residual: (report.a2_q - (4.0 * report.w0 - 2.0 * report.total_gauss)).abs(),
    })
}

/// (sup|u| + ∫Q) / (W0² + 1).
pub fn apriori_ratio(report: &EnergyReport) -> f64 {
    (report.sup_u + report.area) / (report.w0 * report.w0 + 1.0)
}

/// Report with certificates for a disk or annulus domain.
pub fn full_report(
    u: &ScalarField,
    domain: &DiscreteDomain,
    params: HelfrichParams,
    phi: Option<&dyn crate::analytic::AnalyticField>,
    tol: f64,
) -> Result<EnergyReport> {
    let b = geometry_bundle(u, domain)?;
    let mut report = report_from_bundle(u, domain, &b, params);
    if !matches!(domain.shape(), Shape::Rectangle { .. }) {
        let curve = BoundaryCurve::of_domain(domain)?;
        let trace = match phi {
            Some(f) => BoundaryTrace::with_data(domain, u, &curve, f),
            None => BoundaryTrace::from_field(domain, u, &curve),
        };
        report.certificates = Some(bound_certificates(&report, &curve, &trace, tol)?);
    }
    Ok(report)
}

/// Default extension of φ″/(1+φ′²) into Ω: the boundary value at the
/// nearest boundary point, multiplied by a C² cutoff that equals 1 within
/// `collar · inradius` of ∂Ω and vanishes beyond twice that distance.
pub fn default_alpha_extension(
    domain: &DiscreteDomain,
    curve: &BoundaryCurve,
    trace: &BoundaryTrace,
    collar: f64,
) -> Result<ScalarField> {
    let shape = domain.shape();
    let (center, radii): (_, Vec<f64>) = match shape {
        Shape::Disk { center, radius } => (center, vec![radius]),
        Shape::Annulus { center, inner, outer } => (center, vec![outer, inner]),
        Shape::Rectangle { .. } => return Err(Error::Precondition("α extension needs a disk or annulus".into())),
    };
    let width = collar * shape.inradius();
    let values: Vec<Vec<f64>> = trace
        .components
        .iter()
        .map(|t| (0..t.phi.len()).map(|i| t.d2phi[i] / (1.0 + t.dphi[i] * t.dphi[i])).collect())
        .collect();
    Ok(domain.sample(|p| {
        let d = -shape.signed_distance(p);
        let beta = if d <= width {
            1.0
        } else if d >= 2.0 * width {
            0.0
        } else {
            1.0 - smootherstep((d - width) / width).0
        };
        if beta == 0.0 {
            return 0.0;
        }
        let r = (p[0] - center[0]).hypot(p[1] - center[1]);
        let ci = if radii.len() == 2 && r - radii[1] < radii[0] - r { 1 } else { 0 };
        let outer = ci == 0;
        let mut th = (p[1] - center[1]).atan2(p[0] - center[0]);
        if !outer {
            th = -th;
        }
        let n = curve.components[ci].len();
        beta * periodic_catmull_rom(&values[ci], th.rem_euclid(2.0 * PI) / (2.0 * PI) * n as f64)
    }))
}

/// C¹ periodic interpolation of uniform samples at fractional index `x`.
fn periodic_catmull_rom(v: &[f64], x: f64) -> f64 {
    let n = v.len() as isize;
    let i = x.floor() as isize;
    let t = x - i as f64;
    let at = |j: isize| v[j.rem_euclid(n) as usize];
    let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
    if t == 0.0 {
        return p1;
    }
    0.5 * (2.0 * p1
        + (-p0 + p2) * t
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t)
}

/// E_G = 2πχ + ∫Hα dx + ∫(∇u/Q)·∇α dx − ∮κ/Q ds for an extension α of
/// φ″/(1+φ′²). Fails if α misses that trace by more than `tol`.
pub fn gauss_energy_eg(
    domain: &DiscreteDomain,
    u: &ScalarField,
    bundle: &GeometryBundle,
    curve: &BoundaryCurve,
    trace: &BoundaryTrace,
    alpha: &ScalarField,
    tol: f64,
) -> Result<f64> {
    let a_samples = sample_field(domain, alpha, curve);
    let u_samples = sample_field(domain, u, curve);
    let mut boundary = 0.0;
    for ((c, t), (asmp, usmp)) in curve.components.iter().zip(&trace.components).zip(a_samples.iter().zip(&u_samples)) {
        for i in 0..c.len() {
            let want = t.d2phi[i] / (1.0 + t.dphi[i] * t.dphi[i]);
            if (asmp[i].0 - want).abs() > tol {
                return Err(Error::Precondition(format!(
                    "α trace differs from φ″/(1+φ′²) by {:e} at s = {}",
                    (asmp[i].0 - want).abs(),
                    c.s[i]
                )));
            }
        }
        boundary += c.integrate(|i| {
            let g = usmp[i].1;
            c.curvature[i] / (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt()
        });
    }
    let ga = domain.gradient(alpha);
    let interior = domain.integrate_with(|k| {
        let w = bundle.w.get(k);
        let g = ga.get(k);
        bundle.mean_curvature.get(k) * alpha.get(k) + w[0] * g[0] + w[1] * g[1]
    });
    Ok(2.0 * PI * domain.euler_characteristic() as f64 + interior - boundary)
}

/// W^a_0: the Willmore energy of the regular part, with derivatives never
/// taken across the jump set. The jump set must be the cut the domain was
/// built with.
pub fn willmore_absolutely_continuous(u: &ScalarField, domain: &DiscreteDomain, jump: Option<Cut>) -> Result<f64> {
    if jump != domain.cut() {
        return Err(Error::Precondition(format!(
            "jump set {:?} does not match the flagged facets {:?} of the domain",
            jump,
            domain.cut()
        )));
    }
    let b = geometry_bundle(u, domain)?;
    Ok(willmore_w0(domain, &b))
}
