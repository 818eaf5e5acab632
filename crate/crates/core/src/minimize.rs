//! Energy descent for W_γ and the Helfrich energy over clamped (Dirichlet)
//! or hinged (Navier) discrete graph classes, with residuals of the
//! Willmore equation and of the natural boundary condition.
//!
//! The discrete energy is `Σ_k w_k [αQ + ¼(H − H₀)²Q − γ det D²u / Q³]` with
//! the face-flux H. Its gradient is assembled exactly by transposing the
//! stencils; a finite-difference gradient is kept as an oracle.

use serde::Serialize;

use crate::analytic::{Analytic, AnalyticField};
use crate::boundary::{normal_curvature, sample_field, BoundaryCurve, BoundaryTrace};
use crate::energy::HelfrichParams;
use crate::graphgeom::geometry_bundle;
use crate::grid::{Accumulator, DiscreteDomain, ScalarField, VectorField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// u = φ and ∂u/∂ν = ∂φ/∂ν: the boundary layer and the next layer are fixed.
    Dirichlet,
    /// u = φ: only the boundary layer is fixed.
    Navier,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialField {
    /// φ at every node.
    PhiExtension,
    /// Zero at free nodes.
    Zero,
    /// φ plus a seeded clamped bump; constrained nodes are reset to φ.
    SeededBump { seed: u64, center: [f64; 2], radius: f64, amplitude: f64 },
    /// Must already satisfy the constraints.
    Custom(ScalarField),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    /// Exact gradient of the discrete energy by stencil transposition.
    Adjoint,
    /// Forward differences with step √ε·max(1, |u_k|); O(n²).
    ForwardDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeConfig {
    pub mode: Mode,
    pub params: HelfrichParams,
    pub init: InitialField,
    pub max_iter: usize,
    pub step0: f64,
    pub backtrack: f64,
    pub armijo: f64,
    /// Stop when √(Σ g_k²/w_k) falls below this.
    pub grad_tol: f64,
    /// Stop when an accepted step lowers the energy by less than this
    /// fraction of its value.
    pub energy_tol: f64,
    /// Q is replaced by max(Q, q_floor); Q ≥ 1 already, so 1 is a no-op.
    pub q_floor: f64,
    pub gradient: GradientMethod,
    pub precondition: bool,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            mode: Mode::Dirichlet,
            params: HelfrichParams { alpha: 0.0, h0: 0.0, gamma: 0.0 },
            init: InitialField::PhiExtension,
            max_iter: 500,
            step0: 1e-2,
            backtrack: 0.5,
            armijo: 1e-4,
            grad_tol: 1e-10,
            energy_tol: 1e-15,
            q_floor: 1.0,
            gradient: GradientMethod::Adjoint,
            precondition: true,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Config(format!("{} = {} is out of range", what, v)));
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol", self.grad_tol);
        }
        if !(self.energy_tol > 0.0) {
            return bad("energy_tol", self.energy_tol);
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack", self.backtrack);
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo", self.armijo);
        }
        if !(self.step0 > 0.0 && self.step0.is_finite()) {
            return bad("step0", self.step0);
        }
        if !(self.q_floor >= 1.0 && self.q_floor.is_finite()) {
            return bad("q_floor", self.q_floor);
        }
        let p = self.params;
        if ![p.alpha, p.h0, p.gamma].iter().all(|v| v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite energy parameters {:?}", p)));
        }
        Ok(())
    }
}

/// Nodes held at φ and their values.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub fixed: Vec<bool>,
    pub values: Vec<f64>,
}

impl Constraint {
    pub fn new(domain: &DiscreteDomain, phi: &dyn AnalyticField, mode: Mode) -> Self {
        let depth = match mode {
            Mode::Dirichlet => 1,
            Mode::Navier => 0,
        };
        let layers = domain.boundary_layers(2);
        let fixed: Vec<bool> = layers.iter().map(|&l| l <= depth).collect();
        let values = domain.positions().iter().map(|&p| phi.value(p)).collect();
        Constraint { fixed, values }
    }

    /// max |u − φ| over fixed nodes.
    pub fn violation(&self, u: &ScalarField) -> f64 {
        (0..u.len()).filter(|&k| self.fixed[k]).map(|k| (u.get(k) - self.values[k]).abs()).fold(0.0, f64::max)
    }

    fn check(&self, u: &ScalarField) -> Result<()> {
        let v = self.violation(u);
        if v > 1e-12 * (1.0 + self.values.iter().fold(0.0f64, |a, b| a.max(b.abs()))) {
            return Err(Error::Precondition(format!("field violates the boundary constraints by {:e}", v)));
        }
        Ok(())
    }

    fn project(&self, u: &mut ScalarField) {
        for (k, v) in u.values_mut().iter_mut().enumerate() {
            if self.fixed[k] {
                *v = self.values[k];
            }
        }
    }
}

/// The discrete energy on one domain.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteEnergy<'a> {
    pub domain: &'a DiscreteDomain,
    pub params: HelfrichParams,
    pub q_floor: f64,
}

/// Per-node quantities of the energy.
struct NodeState {
    g: [f64; 2],
    hs: [f64; 3],
    h: f64,
}

impl<'a> DiscreteEnergy<'a> {
    pub fn new(domain: &'a DiscreteDomain, params: HelfrichParams) -> Self {
        DiscreteEnergy { domain, params, q_floor: 1.0 }
    }

    fn state(&self, u: &[f64]) -> Vec<NodeState> {
        let d = self.domain;
        let (dx, dy) = d.gradient_ops();
        let (dxx, dxy, dyy) = d.hessian_ops();
        let f = d.flux_op();
        (0..d.len())
            .map(|k| {
                let mut h = 0.0;
                for fi in f.faces(k) {
                    let nn = f.normal.row_dot_rel(fi, u, u[k]);
                    let tt = f.tangent.row_dot_rel(fi, u, u[k]);
                    h += f.coef[fi] * nn / (1.0 + nn * nn + tt * tt).sqrt();
                }
                NodeState {
                    g: [dx.row_dot_rel(k, u, u[k]), dy.row_dot_rel(k, u, u[k])],
                    hs: [dxx.row_dot_rel(k, u, u[k]), dxy.row_dot_rel(k, u, u[k]), dyy.row_dot_rel(k, u, u[k])],
                    h,
                }
            })
            .collect()
    }

    fn q(&self, g: [f64; 2]) -> (f64, bool) {
        let q = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
        if q < self.q_floor {
            (self.q_floor, true)
        } else {
            (q, false)
        }
    }

    fn density(&self, s: &NodeState) -> f64 {
        let p = self.params;
        let (q, _) = self.q(s.g);
        let det = s.hs[0] * s.hs[2] - s.hs[1] * s.hs[1];
        let dh = s.h - p.h0;
        p.alpha * q + 0.25 * dh * dh * q - p.gamma * det / (q * q * q)
    }

    pub fn value(&self, u: &ScalarField) -> f64 {
        let st = self.state(u.values());
        let w = self.domain.weights();
        let mut acc = Accumulator::default();
        for (k, s) in st.iter().enumerate() {
            acc.add(w[k] * self.density(s));
        }
        acc.sum()
    }

    /// Energy and its exact gradient with respect to every nodal value.
    pub fn value_and_gradient(&self, u: &ScalarField) -> (f64, Vec<f64>) {
        let d = self.domain;
        let uv = u.values();
        let st = self.state(uv);
        let w = d.weights();
        let p = self.params;
        let n = d.len();
        let mut acc = Accumulator::default();
        let (mut ygx, mut ygy) = (vec![0.0; n], vec![0.0; n]);
        let (mut yxx, mut yxy, mut yyy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut yh = vec![0.0; n];
        for (k, s) in st.iter().enumerate() {
            acc.add(w[k] * self.density(s));
            let (q, floored) = self.q(s.g);
            let q3 = q * q * q;
            let det = s.hs[0] * s.hs[2] - s.hs[1] * s.hs[1];
            let dh = s.h - p.h0;
            if !floored {
                let de_dq = p.alpha + 0.25 * dh * dh + 3.0 * p.gamma * det / (q3 * q);
                ygx[k] = w[k] * de_dq * s.g[0] / q;
                ygy[k] = w[k] * de_dq * s.g[1] / q;
            }
            yxx[k] = -w[k] * p.gamma * s.hs[2] / q3;
            yyy[k] = -w[k] * p.gamma * s.hs[0] / q3;
            yxy[k] = 2.0 * w[k] * p.gamma * s.hs[1] / q3;
            yh[k] = w[k] * 0.5 * dh * q;
        }
        let mut grad = vec![0.0; n];
        let (dx, dy) = d.gradient_ops();
        let (dxx, dxy, dyy) = d.hessian_ops();
        dx.apply_rel_transpose_add(&ygx, &mut grad);
        dy.apply_rel_transpose_add(&ygy, &mut grad);
        dxx.apply_rel_transpose_add(&yxx, &mut grad);
        dxy.apply_rel_transpose_add(&yxy, &mut grad);
        dyy.apply_rel_transpose_add(&yyy, &mut grad);
        let f = d.flux_op();
        for k in 0..n {
            if yh[k] == 0.0 {
                continue;
            }
            for fi in f.faces(k) {
                let nn = f.normal.row_dot_rel(fi, uv, uv[k]);
                let tt = f.tangent.row_dot_rel(fi, uv, uv[k]);
                let s2 = 1.0 + nn * nn + tt * tt;
                let s3 = s2 * s2.sqrt();
                let yn = yh[k] * f.coef[fi] * (1.0 + tt * tt) / s3;
                let yt = -yh[k] * f.coef[fi] * nn * tt / s3;
                for (col, wt) in f.normal.row(fi) {
                    grad[col] += yn * wt;
                }
                grad[k] -= yn * f.normal.row_sum(fi);
                for (col, wt) in f.tangent.row(fi) {
                    grad[col] += yt * wt;
                }
                grad[k] -= yt * f.tangent.row_sum(fi);
            }
        }
        (acc.sum(), grad)
    }
}

/// Energy gradient restricted to free nodes (zero on fixed nodes).
///
/// Errors if `u` violates the constraints.
pub fn discrete_energy_gradient(
    u: &ScalarField,
    domain: &DiscreteDomain,
    constraint: &Constraint,
    config: &MinimizeConfig,
) -> Result<ScalarField> {
    constraint.check(u)?;
    let e = DiscreteEnergy { domain, params: config.params, q_floor: config.q_floor };
    let mut g = match config.gradient {
        GradientMethod::Adjoint => e.value_and_gradient(u).1,
        GradientMethod::ForwardDifference => fd_gradient(&e, u, constraint, false),
    };
    for (k, v) in g.iter_mut().enumerate() {
        if constraint.fixed[k] {
            *v = 0.0;
        }
    }
    Ok(ScalarField::new(g))
}

/// Difference-quotient gradient over free nodes; `central` selects central
/// differences with step ε^{1/3} instead of forward differences.
pub fn fd_gradient(e: &DiscreteEnergy, u: &ScalarField, constraint: &Constraint, central: bool) -> Vec<f64> {
    let base = e.value(u);
    let mut work = u.clone();
    let mut g = vec![0.0; u.len()];
    for k in 0..u.len() {
        if constraint.fixed[k] {
            continue;
        }
        let scale = 1.0f64.max(u.get(k).abs());
        if central {
            let step = f64::EPSILON.cbrt() * scale;
            work.values_mut()[k] = u.get(k) + step;
            let a = e.value(&work);
            work.values_mut()[k] = u.get(k) - step;
            let b = e.value(&work);
            g[k] = (a - b) / (2.0 * step);
        } else {
            let step = f64::EPSILON.sqrt() * scale;
            work.values_mut()[k] = u.get(k) + step;
            g[k] = (e.value(&work) - base) / step;
        }
        work.values_mut()[k] = u.get(k);
    }
    g
}

// ---------------------------------------------------------------------------
// Preconditioner

fn dot_unrolled(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (xc, yc) = (x.chunks_exact(8), y.chunks_exact(8));
    let tail: f64 = xc.remainder().iter().zip(yc.remainder()).map(|(a, b)| a * b).sum();
    for (a, b) in xc.zip(yc) {
        for i in 0..8 {
            acc[i] += a[i] * b[i];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Cholesky factor of a symmetric positive definite band matrix.
#[derive(Debug, Clone)]
struct BandCholesky {
    n: usize,
    bw: usize,
    /// Row i stores columns i − bw ..= i.
    l: Vec<f64>,
}

impl BandCholesky {
    fn factor(n: usize, bw: usize, mut a: Vec<f64>) -> Result<Self> {
        let s = bw + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let lo = j0.max(j.saturating_sub(bw));
                let mut sum = a[i * s + (j + bw - i)];
                let (ri, rj) = (i * s + bw - i, j * s + bw - j);
                let dot = dot_unrolled(&a[ri + lo..ri + j], &a[rj + lo..rj + j]);
                sum -= dot;
                if j == i {
                    if !(sum > 0.0) {
                        return Err(Error::Numerical("preconditioner is not positive definite".into()));
                    }
                    a[i * s + bw] = sum.sqrt();
                } else {
                    a[i * s + (j + bw - i)] = sum / a[j * s + bw];
                }
            }
        }
        Ok(BandCholesky { n, bw, l: a })
    }

    fn solve(&self, b: &mut [f64]) {
        let (n, bw, s) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let mut v = b[i];
            for j in j0..i {
                v -= self.l[i * s + (j + bw - i)] * b[j];
            }
            b[i] = v / self.l[i * s + bw];
        }
        for i in (0..n).rev() {
            b[i] /= self.l[i * s + bw];
            let v = b[i];
            for j in i.saturating_sub(bw)..i {
                b[j] -= self.l[i * s + (j + bw - i)] * v;
            }
        }
    }
}

/// Work limit (multiply–adds) for the banded factorization; beyond it the
/// preconditioner falls back to the diagonal.
const BAND_BUDGET: f64 = 6e10;

/// Inverse of the energy Hessian at a flat graph,
/// ½ LᵀWL + (α + ¼H₀²)(DxᵀWDx + DyᵀWDy), restricted to free columns, where L
/// is the linearized flux curvature. Rows of every node contribute, fixed or not.
#[derive(Debug, Clone)]
struct Preconditioner {
    free: Vec<usize>,
    kind: PrecKind,
}

#[derive(Debug, Clone)]
enum PrecKind {
    Band(BandCholesky),
    Diagonal(Vec<f64>),
}

/// Row k of a relative-difference operator as absolute coefficients.
fn absolute_row(op: &crate::grid::SparseOp, i: usize, k: usize, scale: f64, out: &mut Vec<(usize, f64)>) {
    for (col, wt) in op.row(i) {
        out.push((col, scale * wt));
    }
    out.push((k, -scale * op.row_sum(i)));
}

impl Preconditioner {
    fn new(domain: &DiscreteDomain, fixed: &[bool], area_weight: f64) -> Result<Self> {
        let n = domain.len();
        let free: Vec<usize> = (0..n).filter(|&k| !fixed[k]).collect();
        let mut index = vec![usize::MAX; n];
        for (i, &k) in free.iter().enumerate() {
            index[k] = i;
        }
        let w = domain.weights();
        let f = domain.flux_op();
        let (dx, dy) = domain.gradient_ops();
        // Each row contributes c·rᵀr with r restricted to free columns.
        let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
        let mut buf = Vec::new();
        let mut push = |c: f64, buf: &mut Vec<(usize, f64)>| {
            let mut r: Vec<(usize, f64)> =
                buf.drain(..).filter(|&(col, _)| index[col] != usize::MAX).map(|(col, v)| (index[col], v)).collect();
            r.sort_by_key(|e| e.0);
            r.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            if !r.is_empty() && c > 0.0 {
                rows.push((c, r));
            }
        };
        for k in 0..n {
            for fi in f.faces(k) {
                absolute_row(&f.normal, fi, k, f.coef[fi], &mut buf);
            }
            push(0.5 * w[k], &mut buf);
            if area_weight > 0.0 {
                absolute_row(dx, k, k, 1.0, &mut buf);
                push(area_weight * w[k], &mut buf);
                absolute_row(dy, k, k, 1.0, &mut buf);
                push(area_weight * w[k], &mut buf);
            }
        }
        let m = free.len();
        let bw = rows.iter().map(|(_, r)| r.last().unwrap().0 - r[0].0).max().unwrap_or(0);
        let kind = if (m as f64) * (bw as f64).powi(2) <= BAND_BUDGET {
            let s = bw + 1;
            let mut a = vec![0.0; m * s];
            for (c, r) in &rows {
                for (p, &(i, vi)) in r.iter().enumerate() {
                    for &(j, vj) in &r[..=p] {
                        a[i * s + (j + bw - i)] += c * vi * vj;
                    }
                }
            }
            // Guard against modes the flat Hessian does not see.
            let dmax = (0..m).map(|i| a[i * s + bw]).fold(0.0, f64::max);
            for i in 0..m {
                a[i * s + bw] += 1e-12 * dmax;
            }
            PrecKind::Band(BandCholesky::factor(m, bw, a)?)
        } else {
            let mut d = vec![0.0; m];
            for (c, r) in &rows {
                for &(i, v) in r {
                    d[i] += c * v * v;
                }
            }
            PrecKind::Diagonal(d)
        };
        Ok(Preconditioner { free, kind })
    }

    /// z = H⁻¹ g on free nodes (g and z indexed by node).
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.free.iter().map(|&k| g[k]).collect();
        match &self.kind {
            PrecKind::Band(a) => a.solve(&mut y),
            PrecKind::Diagonal(d) => {
                for (v, d) in y.iter_mut().zip(d) {
                    *v /= d;
                }
            }
        }
        let mut z = vec![0.0; g.len()];
        for (i, &k) in self.free.iter().enumerate() {
            z[k] = y[i];
        }
        z
    }
}

// ---------------------------------------------------------------------------
// Residuals

/// Willmore-equation residual Δ_Γ H + 2H(¼H² − K) with
/// Δ_Γ f = (1/Q)∇·(Q g⁻¹∇f) and the pointwise H, K.
pub fn willmore_residual(u: &ScalarField, domain: &DiscreteDomain) -> Result<ScalarField> {
    let b = geometry_bundle(u, domain)?;
    let h = &b.mean_curvature_nd;
    let dh = domain.gradient(h);
    let n = domain.len();
    let (mut fx, mut fy) = (vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let gi = b.g_inv.get(k);
        let q = b.area_element.get(k);
        let d = dh.get(k);
        fx[k] = q * (gi[0][0] * d[0] + gi[0][1] * d[1]);
        fy[k] = q * (gi[1][0] * d[0] + gi[1][1] * d[1]);
    }
    let div = domain.divergence(&VectorField::new(fx, fy));
    Ok(ScalarField::new(
        (0..n)
            .map(|k| {
                let hk = h.get(k);
                div.get(k) / b.area_element.get(k) + 2.0 * hk * (0.25 * hk * hk - b.gauss_curvature.get(k))
            })
            .collect(),
    ))
}

/// Nodes at least `depth` layers away from the boundary and, on polar grids
/// with an origin node, at least `depth` rings away from the origin; there
/// the nested stencils of the residual see only regular stencils.
pub fn deep_interior(domain: &DiscreteDomain, depth: u8) -> Vec<bool> {
    let origin = domain.polar_info().map(|p| p.has_origin).unwrap_or(false);
    domain
        .boundary_layers(depth)
        .iter()
        .enumerate()
        .map(|(k, &l)| l >= depth && !(origin && domain.slot(k).0 < depth as usize))
        .collect()
}

/// max |willmore_residual| over [`deep_interior`] nodes of depth three.
pub fn max_interior_residual(u: &ScalarField, domain: &DiscreteDomain) -> Result<f64> {
    let r = willmore_residual(u, domain)?;
    let mask = deep_interior(domain, 3);
    Ok((0..domain.len()).filter(|&k| mask[k]).map(|k| r.get(k).abs()).fold(0.0, f64::max))
}

/// |H − 2γκ_N| at every boundary sample.
pub fn navier_residual(u: &ScalarField, domain: &DiscreteDomain, gamma: f64) -> Result<Vec<Vec<f64>>> {
    let curve = BoundaryCurve::of_domain(domain)?;
    let trace = BoundaryTrace::from_field(domain, u, &curve);
    let kn = normal_curvature(&trace, &curve, f64::INFINITY)?;
    let b = geometry_bundle(u, domain)?;
    let hs = sample_field(domain, &b.mean_curvature_nd, &curve);
    Ok(hs
        .iter()
        .zip(&kn)
        .map(|(h, k)| h.iter().zip(k).map(|(h, k)| (h.0 - 2.0 * gamma * k).abs()).collect())
        .collect())
}

// ---------------------------------------------------------------------------
// Descent

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub willmore_residual: f64,
    /// Navier mode only.
    pub navier_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    EnergyStall,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeTrace {
    pub rows: Vec<TraceRow>,
    pub reason: StopReason,
    /// min q = Q^{−5/2} of the final field (near-vertical indicator).
    pub min_q: f64,
}

impl MinimizeTrace {
    pub fn write_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(w, "iteration,energy,grad_norm,step,willmore_residual,navier_residual")?;
        for r in &self.rows {
            let nav = r.navier_residual.map(|v| format!("{:.16e}", v)).unwrap_or_default();
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.iteration, r.energy, r.grad_norm, r.step, r.willmore_residual, nav
            )?;
        }
        Ok(())
    }

    pub fn initial_energy(&self) -> f64 {
        self.rows.first().map(|r| r.energy).unwrap_or(f64::NAN)
    }

    pub fn final_energy(&self) -> f64 {
        self.rows.last().map(|r| r.energy).unwrap_or(f64::NAN)
    }
}

/// Line-search failures in a row that end the run.
const MAX_FAILURES: usize = 50;

fn initial_field(config: &MinimizeConfig, domain: &DiscreteDomain, phi: &dyn AnalyticField, c: &Constraint) -> Result<ScalarField> {
    match &config.init {
        InitialField::PhiExtension => Ok(ScalarField::new(c.values.clone())),
        InitialField::Zero => {
            let mut u = ScalarField::zeros(domain.len());
            c.project(&mut u);
            Ok(u)
        }
        InitialField::SeededBump { seed, center, radius, amplitude } => {
            let bump = Analytic::random_clamped_bump(*seed, *center, *radius, *amplitude);
            let mut u = domain.sample(|p| phi.value(p) + bump.value(p));
            c.project(&mut u);
            Ok(u)
        }
        InitialField::Custom(u) => {
            if u.len() != domain.len() {
                return Err(Error::Precondition("initial field does not live on this domain".into()));
            }
            c.check(u)?;
            Ok(u.clone())
        }
    }
}

fn dual_norm(g: &[f64], w: &[f64], fixed: &[bool]) -> f64 {
    let mut acc = Accumulator::default();
    for k in 0..g.len() {
        if !fixed[k] {
            acc.add(g[k] * g[k] / w[k]);
        }
    }
    acc.sum().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = Accumulator::default();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.sum()
}

/// Preconditioned nonlinear conjugate gradients with Armijo backtracking.
pub fn minimize(
    config: &MinimizeConfig,
    domain: &DiscreteDomain,
    phi: &dyn AnalyticField,
) -> Result<(ScalarField, MinimizeTrace)> {
    config.validate()?;
    let c = Constraint::new(domain, phi, config.mode);
    if c.fixed.iter().all(|&f| f) {
        return Err(Error::Config("no free nodes: the grid is too coarse for the constraint layers".into()));
    }
    let mut u = initial_field(config, domain, phi, &c)?;
    let energy = DiscreteEnergy { domain, params: config.params, q_floor: config.q_floor };
    let prec = if config.precondition { Some(Preconditioner::new(domain, &c.fixed, (config.params.alpha + 0.25 * config.params.h0 * config.params.h0).max(0.0))?) } else { None };
    let w = domain.weights();
    let n = domain.len();
    let gradient = |u: &ScalarField| -> Result<(f64, Vec<f64>)> {
        let (e, mut g) = match config.gradient {
            GradientMethod::Adjoint => energy.value_and_gradient(u),
            GradientMethod::ForwardDifference => (energy.value(u), fd_gradient(&energy, u, &c, false)),
        };
        for k in 0..n {
            if c.fixed[k] {
                g[k] = 0.0;
            }
        }
        if !e.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("energy or gradient is not finite".into()));
        }
        Ok((e, g))
    };
    let precond = |g: &[f64]| -> Vec<f64> {
        match &prec {
            Some(p) => p.apply(g),
            None => g.iter().enumerate().map(|(k, v)| v / w[k]).collect(),
        }
    };
    let row = |it: usize, e: f64, gn: f64, step: f64, u: &ScalarField| -> Result<TraceRow> {
        let nav = match config.mode {
            Mode::Navier => Some(
                navier_residual(u, domain, config.params.gamma)?.iter().flatten().cloned().fold(0.0, f64::max),
            ),
            Mode::Dirichlet => None,
        };
        Ok(TraceRow {
            iteration: it,
            energy: e,
            grad_norm: gn,
            step,
            willmore_residual: max_interior_residual(u, domain)?,
            navier_residual: nav,
        })
    };

    let (mut e, mut g) = gradient(&u)?;
    let mut gn = dual_norm(&g, w, &c.fixed);
    let gn0 = gn;
    let mut rows = vec![row(0, e, gn, 0.0, &u)?];
    let mut z = precond(&g);
    let mut d: Vec<f64> = z.iter().map(|v| -v).collect();
    let mut step = config.step0;
    let step_max = 1.0;
    let mut failures = 0usize;
    let mut reason = StopReason::IterationCap;
    let mut it = 0;
    while it < config.max_iter {
        if gn <= config.grad_tol {
            reason = StopReason::GradientTolerance;
            break;
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            d = z.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut s = step;
        let mut restarted = false;
        let accepted = loop {
            let mut trial = u.clone();
            for (k, v) in trial.values_mut().iter_mut().enumerate() {
                *v += s * d[k];
            }
            let et = energy.value(&trial);
            if et.is_finite() && et <= e + config.armijo * s * slope && et < e {
                break Some((trial, et));
            }
            failures += 1;
            if failures >= MAX_FAILURES {
                // Converged to the roundoff floor of the energy.
                if gn <= 1e-6 * gn0 {
                    break None;
                }
                return Err(Error::Stagnation {
                    iterations: it,
                    detail: format!(
                        "line search failed {} times in a row at energy {:e}, gradient norm {:e}, slope {:e}",
                        failures, e, gn, slope
                    ),
                });
            }
            s *= config.backtrack;
            if s < 1e-12 * step && !restarted {
                // Fall back to the preconditioned steepest-descent direction.
                d = z.iter().map(|v| -v).collect();
                slope = dot(&g, &d);
                s = step;
                restarted = true;
            }
        };
        let Some((un, en)) = accepted else {
            reason = StopReason::EnergyStall;
            break;
        };
        failures = 0;
        it += 1;
        let decrease = e - en;
        u = un;
        let (e2, g2) = gradient(&u)?;
        let z2 = precond(&g2);
        // Polak–Ribière with restart.
        let num = dot(&g2, &z2) - dot(&g, &z2);
        let den = dot(&g, &z);
        let beta = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
        d = z2.iter().zip(&d).map(|(zv, dv)| -zv + beta * dv).collect();
        e = e2;
        g = g2;
        z = z2;
        gn = dual_norm(&g, w, &c.fixed);
        rows.push(row(it, e, gn, s, &u)?);
        step = (s / config.backtrack).min(step_max);
        if decrease <= config.energy_tol * e.abs() {
            reason = StopReason::EnergyStall;
            break;
        }
    }
    if it >= config.max_iter && gn <= config.grad_tol {
        reason = StopReason::GradientTolerance;
    }
    let min_q = domain
        .gradient(&u)
        .norm()
        .values()
        .iter()
        .map(|gm| (1.0 + gm * gm).powf(-1.25))
        .fold(f64::INFINITY, f64::min);
    Ok((u, MinimizeTrace { rows, reason, min_q }))
}

/// Outcome of one seeded start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartOutcome {
    pub seed: u64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub iterations: usize,
    pub reason: Option<StopReason>,
    pub error: Option<String>,
    pub min_q: f64,
}

/// Runs one seeded-bump start per seed on threads and returns the outcomes
/// in seed order together with the index of the lowest final energy.
pub fn multistart(
    config: &MinimizeConfig,
    domain: &DiscreteDomain,
    phi: &(dyn AnalyticField + Sync),
    seeds: &[u64],
    center: [f64; 2],
    radius: f64,
    amplitude: f64,
) -> (Vec<StartOutcome>, Option<usize>) {
    let outcomes: Vec<StartOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let mut cfg = config.clone();
                cfg.init = InitialField::SeededBump { seed, center, radius, amplitude };
                scope.spawn(move || match minimize(&cfg, domain, phi) {
                    Ok((_, t)) => StartOutcome {
                        seed,
                        initial_energy: t.initial_energy(),
                        final_energy: t.final_energy(),
                        iterations: t.rows.len() - 1,
                        reason: Some(t.reason),
                        error: None,
                        min_q: t.min_q,
                    },
                    Err(e) => StartOutcome {
                        seed,
                        initial_energy: f64::NAN,
                        final_energy: f64::NAN,
                        iterations: 0,
                        reason: None,
                        error: Some(e.to_string()),
                        min_q: f64::NAN,
                    },
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("minimizer thread panicked")).collect()
    });
    let best = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.final_energy.is_finite())
        .min_by(|a, b| a.1.final_energy.total_cmp(&b.1.final_energy))
        .map(|(i, _)| i);
    (outcomes, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_cholesky_solves_tridiagonal() {
        let n = 6;
        let bw = 1;
        let mut a = vec![0.0; n * 2];
        for i in 0..n {
            a[i * 2 + 1] = 2.0;
            if i > 0 {
                a[i * 2] = -1.0;
            }
        }
        let f = BandCholesky::factor(n, bw, a).unwrap();
        let x_true = [1.0, -2.0, 0.5, 3.0, 0.0, 1.5];
        let mut b: Vec<f64> = (0..n)
            .map(|i| {
                2.0 * x_true[i] - if i > 0 { x_true[i - 1] } else { 0.0 } - if i + 1 < n { x_true[i + 1] } else { 0.0 }
            })
            .collect();
        f.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_band_matrix_is_rejected() {
        assert!(BandCholesky::factor(2, 1, vec![0.0, 1.0, 2.0, 1.0]).is_err());
    }
}
