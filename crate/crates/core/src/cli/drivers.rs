//! Experiment drivers behind the `energy`, `example`, `relax`, `minimize`
//! and `sweep` commands.

use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::{fitted_order, observed_orders, Cell, GridInfo, Writer};
use crate::analytic::{Analytic, AnalyticField};
use crate::boundary::{gauss_bonnet_residual, geodesic_curvature, BoundaryCurve, BoundaryTrace};
use crate::corpus::{build_example, divergence_diagnostics, example_domain, mollified_sequence, DivergenceRow};
use crate::energy::{full_report, report_from_bundle, willmore, willmore_w0, EnergyReport};
use crate::graphgeom::geometry_bundle;
use crate::grid::{DiscreteDomain, DomainSpec, Excision, Shape};
use crate::minimize::{max_interior_residual, minimize, multistart, navier_residual, willmore_residual, Mode, StartOutcome, StopReason};
use crate::relax::{boundary_trace_check, lsc_check, sequence_diagnostics, AttainmentReport, LscReport, SequenceDiagnostics};
use crate::{Error, Result};

/// Closed-form energies of the field where they are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reference {
    #[serde(rename = "W0")]
    pub w0: f64,
    pub total_gauss: f64,
    pub area: f64,
}

/// Exact values for flat and affine fields on any domain and for sphere
/// caps over concentric disks.
pub fn reference(field: &Analytic, shape: Shape) -> Option<Reference> {
    use std::f64::consts::PI;
    match (field, shape) {
        (Analytic::Zero | Analytic::Constant { .. }, s) => Some(Reference { w0: 0.0, total_gauss: 0.0, area: s.area() }),
        (Analytic::Affine { a, b, .. }, s) => {
            Some(Reference { w0: 0.0, total_gauss: 0.0, area: s.area() * (1.0 + a * a + b * b).sqrt() })
        }
        (Analytic::SphereCap { center, radius }, Shape::Disk { center: c, radius: rho }) if *center == c && rho < *radius => {
            let big = *radius;
            let area = 2.0 * PI * big * (big - (big * big - rho * rho).sqrt());
            Some(Reference { w0: area / (big * big), total_gauss: area / (big * big), area })
        }
        _ => None,
    }
}

fn build(cfg: &ExperimentConfig, h: f64) -> Result<DiscreteDomain> {
    cfg.domain.spec(h).build()
}

fn has_curve(shape: Shape) -> bool {
    !matches!(shape, Shape::Rectangle { .. })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EnergyRow {
    h: f64,
    report: EnergyReport,
    certificate_note: Option<String>,
    reference: Option<Reference>,
}

pub fn energy(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let refv = reference(&cfg.field, cfg.domain.shape);
    let mut grids = Vec::new();
    let mut rows = Vec::new();
    let mut finest = None;
    for &h in &cfg.resolutions {
        let d = build(cfg, h)?;
        grids.push(GridInfo::of(&d));
        let u = cfg.field.sample(&d);
        let (report, note) = match full_report(&u, &d, cfg.energy, Some(&cfg.boundary), cfg.trace_tol) {
            Ok(r) => (r, None),
            Err(Error::Precondition(m)) => (willmore(&u, &d, cfg.energy)?, Some(m)),
            Err(e) => return Err(e),
        };
        rows.push(EnergyRow { h, report, certificate_note: note, reference: refv });
        finest = Some((d, u));
    }
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .zip(&grids)
        .map(|(r, g)| {
            let e = &r.report;
            vec![
                r.h.into(),
                g.nodes.into(),
                e.area.into(),
                e.w0.into(),
                e.willmore_h.into(),
                e.total_gauss.into(),
                e.w_gamma.into(),
                e.helfrich.value.into(),
                e.a2_q.into(),
                e.sup_u.into(),
                refv.map_or(f64::NAN, |r| r.w0).into(),
            ]
        })
        .collect();
    w.csv(
        "energy.csv",
        &grids,
        &["h", "nodes", "area", "W0", "willmore_H", "total_gauss", "W_gamma", "helfrich", "a2_q", "sup_u", "W0_reference"],
        &table,
    )?;
    if let Some((d, u)) = finest {
        let b = geometry_bundle(&u, &d)?;
        w.raw("geometry.csv", |buf| b.write_csv(&d, buf))?;
    }
    w.json("energy.json", &grids, &rows)?;
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ScalingRow {
    h: f64,
    epsilon: f64,
    #[serde(rename = "W0")]
    w0: f64,
    max_grad: f64,
}

#[derive(Serialize)]
struct ExampleResults {
    excision: Vec<(f64, DivergenceRow)>,
    scaling: Vec<ScalingRow>,
}

pub fn example(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let ex = &cfg.example;
    if ex.deltas.is_empty() && ex.epsilons.is_empty() {
        return Err(Error::Config("example: set deltas, epsilons or both".into()));
    }
    let mut grids = Vec::new();
    let mut excision = Vec::new();
    let mut scaling = Vec::new();
    for &h in &cfg.resolutions {
        let d = example_domain(&ex.field, h, ex.n_theta, Excision::None)?;
        grids.push(GridInfo::of(&d));
        if !ex.deltas.is_empty() {
            for row in divergence_diagnostics(&ex.field, h, ex.n_theta, &ex.deltas, ex.p)? {
                excision.push((h, row));
            }
        }
        if !ex.epsilons.is_empty() {
            let base = build_example(&ex.field, &d)?.u;
            for &eps in &ex.epsilons {
                let b = geometry_bundle(&base.scale(eps), &d)?;
                scaling.push(ScalingRow { h, epsilon: eps, w0: willmore_w0(&d, &b), max_grad: b.gradient.max_norm() });
            }
        }
    }
    if !excision.is_empty() {
        let t: Vec<Vec<Cell>> = excision
            .iter()
            .map(|(h, r)| vec![(*h).into(), r.delta.into(), r.grad_p.into(), r.hess_sq.into(), r.w0.into(), r.grad_error.into(), r.hess_error.into()])
            .collect();
        w.csv("example_excision.csv", &grids, &["h", "delta", "grad_p", "hess_sq", "W0", "grad_error", "hess_error"], &t)?;
    }
    if !scaling.is_empty() {
        let t: Vec<Vec<Cell>> = scaling.iter().map(|r| vec![r.h.into(), r.epsilon.into(), r.w0.into(), r.max_grad.into()]).collect();
        w.csv("example_scaling.csv", &grids, &["h", "epsilon", "W0", "max_grad"], &t)?;
    }
    w.json("example.json", &grids, ExampleResults { excision, scaling })?;
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RelaxRow {
    h: f64,
    sigmas: Vec<f64>,
    diagnostics: SequenceDiagnostics,
    lsc: Option<LscReport>,
    lsc_error: Option<String>,
    attainment: Option<AttainmentReport>,
    attainment_error: Option<String>,
}

pub fn relax(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let (ex, rc) = (&cfg.example, &cfg.relax);
    let f = &ex.field;
    let mut grids = Vec::new();
    let mut rows = Vec::new();
    for &h in &cfg.resolutions {
        let d = example_domain(f, h, ex.n_theta, Excision::None)?;
        grids.push(GridInfo::of(&d));
        let limit = build_example(f, &d)?.u;
        let seq = mollified_sequence(f, &d, rc.sigma0, &rc.js)?;
        let diagnostics = sequence_diagnostics(&d, &seq, &limit, rc.gamma)?;
        let lsc = match f.cut() {
            Some(cut) => {
                let ld = DomainSpec::new(f.shape(), h).polar(Some(ex.n_theta)).with_cut(cut).build()?;
                lsc_check(&d, &seq, &ld, &limit, Some(cut), rc.l1_tol)
            }
            None => lsc_check(&d, &seq, &d, &limit, None, rc.l1_tol),
        };
        let att = boundary_trace_check(&d, &seq, &limit, f, true, rc.attainment_tol.unwrap_or(h));
        let sigmas = rc.js.iter().map(|&j| rc.sigma0 * 0.5f64.powi(j as i32)).collect();
        let (lsc, lsc_error) = split(lsc)?;
        let (attainment, attainment_error) = split(att)?;
        rows.push(RelaxRow { h, sigmas, diagnostics, lsc, lsc_error, attainment, attainment_error });
    }
    let mut t = Vec::new();
    for r in &rows {
        for (s, row) in r.sigmas.iter().zip(&r.diagnostics.rows) {
            t.push(vec![
                r.h.into(),
                (rc.js[row.j - 1] as usize).into(),
                (*s).into(),
                row.w0.into(),
                row.w_gamma.into(),
                row.l1_to_limit.into(),
                row.q_h1.into(),
                row.v_h1.into(),
                row.g_h1.into(),
                row.e_h1.into(),
                row.q_area.into(),
                row.area.into(),
                row.max_grad.into(),
            ]);
        }
    }
    w.csv(
        "relax_sequence.csv",
        &grids,
        &["h", "j", "sigma", "W0", "W_gamma", "l1_to_limit", "q_h1", "v_h1", "g_h1", "e_h1", "q_area", "area", "max_grad"],
        &t,
    )?;
    w.json("relax.json", &grids, &rows)?;
    Ok(())
}

/// Precondition failures become report entries; anything else aborts.
fn split<T>(r: Result<T>) -> Result<(Option<T>, Option<String>)> {
    match r {
        Ok(v) => Ok((Some(v), None)),
        Err(Error::Precondition(m)) => Ok((None, Some(m))),
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MinimizeRow {
    h: f64,
    iterations: usize,
    reason: StopReason,
    initial_energy: f64,
    final_energy: f64,
    sup_u: f64,
    #[serde(rename = "W0")]
    w0: f64,
    max_interior_willmore_residual: f64,
    max_navier_residual: Option<f64>,
    min_q: f64,
    trace_file: String,
    field_file: String,
}

#[derive(Serialize)]
struct MultistartRow {
    h: f64,
    outcomes: Vec<StartOutcome>,
    best: Option<usize>,
}

pub fn minimize_driver(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let mut grids = Vec::new();
    if cfg.minimize.starts > 1 {
        let mut rows = Vec::new();
        let mut t = Vec::new();
        for &h in &cfg.resolutions {
            let d = build(cfg, h)?;
            grids.push(GridInfo::of(&d));
            let m = &cfg.minimize;
            let mc = m.to_config(cfg.energy, cfg.seed);
            let (outcomes, best) = multistart(&mc, &d, &cfg.boundary, &cfg.start_seeds(), m.bump_center, m.bump_radius, m.bump_amplitude);
            for o in &outcomes {
                t.push(vec![
                    h.into(),
                    Cell::I(o.seed as i64),
                    o.initial_energy.into(),
                    o.final_energy.into(),
                    o.iterations.into(),
                    o.reason.map_or("error", reason_str).into(),
                    o.min_q.into(),
                ]);
            }
            rows.push(MultistartRow { h, outcomes, best });
        }
        w.csv("multistart.csv", &grids, &["h", "seed", "initial_energy", "final_energy", "iterations", "reason", "min_q"], &t)?;
        w.json("minimize.json", &grids, &rows)?;
        return Ok(());
    }
    let mut rows = Vec::new();
    for (i, &h) in cfg.resolutions.iter().enumerate() {
        let d = build(cfg, h)?;
        grids.push(GridInfo::of(&d));
        let mc = cfg.minimize.to_config(cfg.energy, cfg.seed);
        let (u, trace) = minimize(&mc, &d, &cfg.boundary)?;
        let rep = willmore(&u, &d, cfg.energy)?;
        let res = willmore_residual(&u, &d)?;
        let nav = if cfg.minimize.mode == Mode::Navier && has_curve(d.shape()) {
            let r = navier_residual(&u, &d, cfg.energy.gamma)?;
            Some(r.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
        } else {
            None
        };
        let tf = w.raw(&format!("minimize_trace_{}.csv", i + 1), |buf| trace.write_csv(buf))?;
        let ff = w.raw(&format!("minimize_field_{}.csv", i + 1), |buf| {
            d.write_csv(buf, &[("u", u.values()), ("willmore_residual", res.values())])
        })?;
        rows.push(MinimizeRow {
            h,
            iterations: trace.rows.len() - 1,
            reason: trace.reason,
            initial_energy: trace.initial_energy(),
            final_energy: trace.final_energy(),
            sup_u: u.max_abs(),
            w0: rep.w0,
            max_interior_willmore_residual: max_interior_residual(&u, &d)?,
            max_navier_residual: nav,
            min_q: trace.min_q,
            trace_file: file_name(&tf),
            field_file: file_name(&ff),
        });
    }
    w.json("minimize.json", &grids, &rows)?;
    Ok(())
}

fn file_name(p: &std::path::Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn reason_str(r: StopReason) -> &'static str {
    match r {
        StopReason::GradientTolerance => "gradient_tolerance",
        StopReason::EnergyStall => "energy_stall",
        StopReason::IterationCap => "iteration_cap",
    }
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SweepRow {
    h: f64,
    nodes: usize,
    #[serde(rename = "W0")]
    w0: f64,
    total_gauss: f64,
    area: f64,
    willmore_h: f64,
    gauss_bonnet_residual: Option<f64>,
}

#[derive(Serialize)]
struct Fit {
    quantity: &'static str,
    /// Exact value, or null when errors are successive differences.
    reference: Option<f64>,
    errors: Vec<f64>,
    observed_orders: Vec<f64>,
    fitted_order: Option<f64>,
}

#[derive(Serialize)]
struct SweepResults {
    rows: Vec<SweepRow>,
    fits: Vec<Fit>,
}

pub fn sweep(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let mut grids = Vec::new();
    let mut rows = Vec::new();
    for &h in &cfg.resolutions {
        let d = build(cfg, h)?;
        grids.push(GridInfo::of(&d));
        let u = cfg.field.sample(&d);
        let b = geometry_bundle(&u, &d)?;
        let rep = report_from_bundle(&u, &d, &b, cfg.energy);
        let gb = if has_curve(d.shape()) {
            let curve = BoundaryCurve::of_domain(&d)?;
            let kg = geodesic_curvature(&BoundaryTrace::from_field(&d, &u, &curve), &curve);
            Some(gauss_bonnet_residual(&d, &b, &kg, curve.euler_characteristic))
        } else {
            None
        };
        rows.push(SweepRow {
            h,
            nodes: d.len(),
            w0: rep.w0,
            total_gauss: rep.total_gauss,
            area: rep.area,
            willmore_h: rep.willmore_h,
            gauss_bonnet_residual: gb,
        });
    }
    let refv = reference(&cfg.field, cfg.domain.shape);
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let fit = |quantity: &'static str, vals: Vec<f64>, exact: Option<f64>| {
        let (hh, errors): (Vec<f64>, Vec<f64>) = match exact {
            Some(x) => (hs.clone(), vals.iter().map(|v| (v - x).abs()).collect()),
            None => (hs[..hs.len().saturating_sub(1)].to_vec(), vals.windows(2).map(|p| (p[0] - p[1]).abs()).collect()),
        };
        Fit { quantity, reference: exact, observed_orders: observed_orders(&hh, &errors), fitted_order: fitted_order(&hh, &errors), errors }
    };
    let fits = vec![
        fit("W0", rows.iter().map(|r| r.w0).collect(), cfg.sweep.reference.or(refv.map(|r| r.w0))),
        fit("total_gauss", rows.iter().map(|r| r.total_gauss).collect(), refv.map(|r| r.total_gauss)),
        fit("area", rows.iter().map(|r| r.area).collect(), refv.map(|r| r.area)),
    ];
    let t: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                r.h.into(),
                r.nodes.into(),
                r.w0.into(),
                r.total_gauss.into(),
                r.area.into(),
                r.willmore_h.into(),
                r.gauss_bonnet_residual.unwrap_or(f64::NAN).into(),
            ]
        })
        .collect();
    w.csv("sweep.csv", &grids, &["h", "nodes", "W0", "total_gauss", "area", "willmore_H", "gauss_bonnet_residual"], &t)?;
    let ft: Vec<Vec<Cell>> = fits
        .iter()
        .map(|f| vec![f.quantity.into(), f.fitted_order.unwrap_or(f64::NAN).into(), f.errors.last().copied().unwrap_or(f64::NAN).into()])
        .collect();
    w.csv("sweep_orders.csv", &grids, &["quantity", "fitted_order", "finest_error"], &ft)?;
    w.json("sweep.json", &grids, SweepResults { rows, fits })?;
    Ok(())
}
