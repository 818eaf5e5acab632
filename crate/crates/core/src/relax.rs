//! Relaxation diagnostics: the bounded auxiliary fields q = Q^{−5/2},
//! v = q∇u, g = Q^{−3/2}, e = u·g, reconstruction of the regular gradient,
//! lower semicontinuity along sequences and boundary attainment of limits.

use serde::Serialize;

use crate::analytic::AnalyticField;
use crate::boundary::{sample_field, BoundaryCurve};
use crate::energy::{report_from_bundle, willmore_absolutely_continuous, willmore_w0, HelfrichParams};
use crate::graphgeom::geometry_bundle;
use crate::grid::{Cut, DiscreteDomain, ScalarField, VectorField};
use crate::{Error, Result};

/// Discrete H¹ seminorm and norm of one scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H1 {
    pub seminorm: f64,
    pub norm: f64,
}

fn h1_scalar(domain: &DiscreteDomain, f: &ScalarField) -> H1 {
    let g = domain.gradient(f);
    let semi = domain.integrate_with(|k| {
        let d = g.get(k);
        d[0] * d[0] + d[1] * d[1]
    });
    let l2 = domain.integrate_with(|k| f.get(k) * f.get(k));
    H1 { seminorm: semi.sqrt(), norm: (semi + l2).sqrt() }
}

fn h1_vector(domain: &DiscreteDomain, f: &VectorField) -> H1 {
    let a = h1_scalar(domain, &ScalarField::new(f.x().to_vec()));
    let b = h1_scalar(domain, &ScalarField::new(f.y().to_vec()));
    H1 { seminorm: a.seminorm.hypot(b.seminorm), norm: a.norm.hypot(b.norm) }
}

/// The auxiliary fields of the compactness argument.
#[derive(Debug, Clone)]
pub struct AuxiliaryFields {
    pub q: ScalarField,
    pub v: VectorField,
    pub g: ScalarField,
    pub e: ScalarField,
    pub q_h1: H1,
    pub v_h1: H1,
    pub g_h1: H1,
    pub e_h1: H1,
    /// Nodes with q ≤ tol.
    pub zero_set: Vec<bool>,
    pub tol: f64,
    /// max |∇q| / (|D²u| Q^{−7/2}) over nodes with nonzero Hessian.
    pub dq_constant: f64,
    /// max |Dv| / (|D²u| Q^{−5/2}) over nodes with nonzero Hessian.
    pub dv_constant: f64,
}

/// q, v, g, e and their discrete H¹ norms; the zero-set threshold is
/// `tol` (the grid spacing when `None`).
pub fn auxiliary_fields(u: &ScalarField, domain: &DiscreteDomain, tol: Option<f64>) -> Result<AuxiliaryFields> {
    u.check_finite("u")?;
    let tol = tol.unwrap_or(domain.h());
    let grad = domain.gradient(u);
    let hess = domain.hessian(u);
    let n = domain.len();
    let (mut q, mut g, mut e) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut vx, mut vy) = (vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let d = grad.get(k);
        let qq = (1.0 + d[0] * d[0] + d[1] * d[1]).sqrt();
        q[k] = qq.powf(-2.5);
        g[k] = qq.powf(-1.5);
        e[k] = u.get(k) * g[k];
        vx[k] = q[k] * d[0];
        vy[k] = q[k] * d[1];
    }
    let (q, g, e, v) = (ScalarField::new(q), ScalarField::new(g), ScalarField::new(e), VectorField::new(vx, vy));
    let dq = domain.gradient(&q);
    let dvx = domain.gradient(&ScalarField::new(v.x().to_vec()));
    let dvy = domain.gradient(&ScalarField::new(v.y().to_vec()));
    let hs2 = hess.frobenius_sq();
    let (mut cq, mut cv) = (0.0f64, 0.0f64);
    for k in 0..n {
        let h = hs2.get(k).sqrt();
        if h <= 1e-12 {
            continue;
        }
        let qq = q.get(k).powf(-0.4);
        let a = dq.get(k);
        cq = cq.max(a[0].hypot(a[1]) / (h * qq.powf(-3.5)));
        let (b, c) = (dvx.get(k), dvy.get(k));
        let dv = (b[0] * b[0] + b[1] * b[1] + c[0] * c[0] + c[1] * c[1]).sqrt();
        cv = cv.max(dv / (h * qq.powf(-2.5)));
    }
    Ok(AuxiliaryFields {
        q_h1: h1_scalar(domain, &q),
        v_h1: h1_vector(domain, &v),
        g_h1: h1_scalar(domain, &g),
        e_h1: h1_scalar(domain, &e),
        zero_set: q.values().iter().map(|&x| x <= tol).collect(),
        q,
        v,
        g,
        e,
        tol,
        dq_constant: cq,
        dv_constant: cv,
    })
}

impl AuxiliaryFields {
    /// max over nodes of |g − q^{3/5}|.
    pub fn g_identity_residual(&self) -> f64 {
        (0..self.q.len()).map(|k| (self.g.get(k) - self.q.get(k).powf(0.6)).abs()).fold(0.0, f64::max)
    }

    /// ∫ q^{−2/5} dx (equal to the area ∫Q dx).
    pub fn q_area(&self, domain: &DiscreteDomain) -> f64 {
        domain.integrate_with(|k| self.q.get(k).powf(-0.4))
    }
}

/// ∇ᵃu = v/q on {q > tol} and Qᵃ = √(1 + |∇ᵃu|²).
#[derive(Debug, Clone)]
pub struct RegularGradient {
    /// NaN where undefined.
    pub gradient: VectorField,
    pub qa: ScalarField,
    pub defined: Vec<bool>,
    /// More than half of the nodes are in {q ≤ tol}.
    pub degenerate: bool,
}

pub fn reconstruct_regular_gradient(aux: &AuxiliaryFields) -> RegularGradient {
    let n = aux.q.len();
    let (mut gx, mut gy, mut qa) = (vec![f64::NAN; n], vec![f64::NAN; n], vec![f64::NAN; n]);
    let mut defined = vec![false; n];
    for k in 0..n {
        let q = aux.q.get(k);
        if q > aux.tol {
            let v = aux.v.get(k);
            gx[k] = v[0] / q;
            gy[k] = v[1] / q;
            qa[k] = (1.0 + gx[k] * gx[k] + gy[k] * gy[k]).sqrt();
            defined[k] = true;
        }
    }
    let undefined = defined.iter().filter(|d| !**d).count();
    RegularGradient {
        gradient: VectorField::new(gx, gy),
        qa: ScalarField::new(qa),
        defined,
        degenerate: 2 * undefined > n,
    }
}

/// One row of sequence bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequenceRow {
    pub j: usize,
    #[serde(rename = "W0")]
    pub w0: f64,
    #[serde(rename = "W_gamma")]
    pub w_gamma: f64,
    pub l1_to_limit: f64,
    pub q_h1: f64,
    pub v_h1: f64,
    pub g_h1: f64,
    pub e_h1: f64,
    pub q_area: f64,
    pub area: f64,
    pub max_grad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceDiagnostics {
    pub gamma: f64,
    pub rows: Vec<SequenceRow>,
}

/// ∫|a − b| dx on `domain` for two fields on the same node set.
pub fn l1_distance(domain: &DiscreteDomain, a: &ScalarField, b: &ScalarField) -> Result<f64> {
    if a.len() != domain.len() || b.len() != domain.len() {
        return Err(Error::Precondition("fields live on different node sets".into()));
    }
    Ok(domain.integrate_with(|k| (a.get(k) - b.get(k)).abs()))
}

/// Energies, L¹ distances and auxiliary-field norms for each member.
pub fn sequence_diagnostics(
    domain: &DiscreteDomain,
    sequence: &[ScalarField],
    limit: &ScalarField,
    gamma: f64,
) -> Result<SequenceDiagnostics> {
    let params = HelfrichParams { alpha: 0.0, h0: 0.0, gamma };
    let rows = sequence
        .iter()
        .enumerate()
        .map(|(j, u)| {
            let b = geometry_bundle(u, domain)?;
            let rep = report_from_bundle(u, domain, &b, params);
            let aux = auxiliary_fields(u, domain, None)?;
            Ok(SequenceRow {
                j: j + 1,
                w0: rep.w0,
                w_gamma: rep.w_gamma,
                l1_to_limit: l1_distance(domain, u, limit)?,
                q_h1: aux.q_h1.norm,
                v_h1: aux.v_h1.norm,
                g_h1: aux.g_h1.norm,
                e_h1: aux.e_h1.norm,
                q_area: aux.q_area(domain),
                area: rep.area,
                max_grad: b.gradient.max_norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let d = SequenceDiagnostics { gamma, rows };
    if d.rows.iter().any(|r| {
        ![r.w0, r.w_gamma, r.l1_to_limit, r.q_h1, r.v_h1, r.g_h1, r.e_h1, r.q_area, r.area].iter().all(|v| v.is_finite())
    }) {
        return Err(Error::Numerical("non-finite entry in sequence diagnostics".into()));
    }
    Ok(d)
}

impl SequenceDiagnostics {
    pub fn write_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(w, "j,W0,W_gamma,l1_to_limit,q_h1,v_h1,g_h1,e_h1,q_area,area,max_grad")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.j, r.w0, r.w_gamma, r.l1_to_limit, r.q_h1, r.v_h1, r.g_h1, r.e_h1, r.q_area, r.area, r.max_grad
            )?;
        }
        Ok(())
    }
}

/// Outcome of a lower-semicontinuity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LscReport {
    pub w0: Vec<f64>,
    pub l1: Vec<f64>,
    /// Minimum of W0 over the final third of the sequence.
    pub liminf_estimate: f64,
    #[serde(rename = "Wa_limit")]
    pub wa_limit: f64,
    /// liminf_estimate − W^a_0(limit).
    pub margin: f64,
}

/// Compares the tail of `W0(u_j)` with `W^a_0` of the limit.
///
/// The sequence lives on `seq_domain`; the limit on `limit_domain`, whose
/// flagged facets must be `jump`. Both must share their node set. The L¹
/// distances must be nonincreasing and end below `l1_tol`.
pub fn lsc_check(
    seq_domain: &DiscreteDomain,
    sequence: &[ScalarField],
    limit_domain: &DiscreteDomain,
    limit: &ScalarField,
    jump: Option<Cut>,
    l1_tol: f64,
) -> Result<LscReport> {
    if sequence.is_empty() {
        return Err(Error::Precondition("empty sequence".into()));
    }
    if seq_domain.positions() != limit_domain.positions() {
        return Err(Error::Precondition("sequence and limit domains have different nodes".into()));
    }
    let l1 = sequence.iter().map(|u| l1_distance(seq_domain, u, limit)).collect::<Result<Vec<_>>>()?;
    if l1.windows(2).any(|w| w[1] > w[0]) || *l1.last().unwrap() > l1_tol {
        return Err(Error::Precondition(format!("sequence is not L¹-convergent to the limit: distances {:?}", l1)));
    }
    let w0 = sequence
        .iter()
        .map(|u| geometry_bundle(u, seq_domain).map(|b| willmore_w0(seq_domain, &b)))
        .collect::<Result<Vec<_>>>()?;
    let tail = w0.len() - w0.len().div_ceil(3);
    let liminf = w0[tail..].iter().cloned().fold(f64::INFINITY, f64::min);
    let wa = willmore_absolutely_continuous(limit, limit_domain, jump)?;
    Ok(LscReport { w0, l1, liminf_estimate: liminf, wa_limit: wa, margin: liminf - wa })
}

/// Attainment of the boundary data at one boundary sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttainmentSample {
    pub component: usize,
    pub s: f64,
    pub value_error: f64,
    /// |∂u/∂ν − ∂φ/∂ν| (clamped mode only).
    pub normal_error: Option<f64>,
    /// g = Q^{−3/2} of the limit at the sample.
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttainmentReport {
    pub samples: Vec<AttainmentSample>,
    pub tol: f64,
    /// Worst errors on {g > tol} and on {g ≤ tol}.
    pub max_value_error_regular: f64,
    pub max_value_error_degenerate: f64,
    pub max_normal_error_regular: f64,
    /// Fraction of samples in {g ≤ tol}.
    pub degenerate_fraction: f64,
}

/// Boundary-value attainment of `limit` against φ, split by whether the
/// graph is vertical there.
///
/// Every sequence member must satisfy the trace condition at boundary nodes.
pub fn boundary_trace_check(
    domain: &DiscreteDomain,
    sequence: &[ScalarField],
    limit: &ScalarField,
    phi: &dyn AnalyticField,
    clamped: bool,
    tol: f64,
) -> Result<AttainmentReport> {
    for (j, u) in sequence.iter().enumerate() {
        for k in 0..domain.len() {
            if domain.on_boundary(k) {
                let want = phi.value(domain.position(k));
                if (u.get(k) - want).abs() > 1e-9 * (1.0 + want.abs()) {
                    return Err(Error::Precondition(format!(
                        "member {} violates the boundary condition at node {}",
                        j + 1,
                        k
                    )));
                }
            }
        }
    }
    let curve = BoundaryCurve::of_domain(domain)?;
    let smp = sample_field(domain, limit, &curve);
    let mut samples = Vec::new();
    for (ci, c) in curve.components.iter().enumerate() {
        for i in 0..c.len() {
            let (val, grad) = smp[ci][i];
            let p = c.position[i];
            let nu = c.normal[i];
            let gp = phi.gradient(p);
            let normal_error =
                clamped.then(|| ((grad[0] - gp[0]) * nu[0] + (grad[1] - gp[1]) * nu[1]).abs());
            samples.push(AttainmentSample {
                component: ci,
                s: c.s[i],
                value_error: (val - phi.value(p)).abs(),
                normal_error,
                g: (1.0 + grad[0] * grad[0] + grad[1] * grad[1]).powf(-0.75),
            });
        }
    }
    let max_by = |pred: &dyn Fn(&AttainmentSample) -> bool, f: &dyn Fn(&AttainmentSample) -> f64| {
        samples.iter().filter(|s| pred(s)).map(f).fold(0.0, f64::max)
    };
    let regular = |s: &AttainmentSample| s.g > tol;
    let degenerate = |s: &AttainmentSample| s.g <= tol;
    Ok(AttainmentReport {
        max_value_error_regular: max_by(&regular, &|s| s.value_error),
        max_value_error_degenerate: max_by(&degenerate, &|s| s.value_error),
        max_normal_error_regular: max_by(&regular, &|s| s.normal_error.unwrap_or(0.0)),
        degenerate_fraction: samples.iter().filter(|s| degenerate(s)).count() as f64 / samples.len().max(1) as f64,
        samples,
        tol,
    })
}

impl AttainmentReport {
    pub fn write_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(w, "component,s,value_error,normal_error,g")?;
        for s in &self.samples {
            let ne = s.normal_error.map(|v| format!("{:.16e}", v)).unwrap_or_default();
            writeln!(w, "{},{:.16e},{:.16e},{},{:.16e}", s.component, s.s, s.value_error, ne, s.g)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DomainSpec, Shape};

    #[test]
    fn flat_field_has_trivial_auxiliaries() {
        let d = DomainSpec::new(Shape::unit_disk(), 1.0 / 16.0).build().unwrap();
        let a = auxiliary_fields(&ScalarField::zeros(d.len()), &d, None).unwrap();
        assert!(a.q.values().iter().all(|&x| x == 1.0));
        assert!(a.g.values().iter().all(|&x| x == 1.0));
        assert!(a.e.values().iter().all(|&x| x == 0.0));
        assert_eq!(a.v.max_norm(), 0.0);
        for n in [a.q_h1, a.v_h1, a.g_h1, a.e_h1] {
            assert_eq!(n.seminorm, 0.0);
        }
    }
}
