//! Pointwise geometry of graph(u): area element, fundamental forms,
//! mean and Gauss curvature and the norm of the second fundamental form.
//!
//! H is the sum of the principal curvatures throughout.

use crate::grid::{DiscreteDomain, NodeClass, ScalarField, TensorField, VectorField};
use crate::Result;

/// Nodal geometry of a graph.
#[derive(Debug, Clone)]
pub struct GeometryBundle {
    pub gradient: VectorField,
    pub hessian: TensorField,
    /// Q = √(1 + |∇u|²).
    pub area_element: ScalarField,
    /// w = ∇u / Q.
    pub w: VectorField,
    /// H = ∇·(∇u/Q) from face fluxes.
    pub mean_curvature: ScalarField,
    /// H = (1/Q)(id − w⊗w) : D²u.
    pub mean_curvature_nd: ScalarField,
    /// K = det D²u / Q⁴.
    pub gauss_curvature: ScalarField,
    /// K = det Dw.
    pub gauss_curvature_dw: ScalarField,
    /// |A|²_g = trace(g⁻¹ A g⁻¹ A).
    pub a2: ScalarField,
    /// (gⁱʲ) = id − w⊗w.
    pub g_inv: TensorField,
    /// (h_ij) = D²u / Q.
    pub second_form: TensorField,
    /// max |H_div − H_nd| over interior nodes.
    pub h_discrepancy: f64,
    /// max |det D²u/Q⁴ − det Dw| over interior nodes.
    pub k_discrepancy: f64,
}

/// Q = √(1 + a² + b²).
pub fn area_element(a: f64, b: f64) -> f64 {
    (1.0 + a * a + b * b).sqrt()
}

/// Geometry at one node from ∇u and D²u: (H_nd, K, |A|²_g).
pub fn pointwise(grad: [f64; 2], hess: [[f64; 2]; 2]) -> (f64, f64, f64) {
    let q = area_element(grad[0], grad[1]);
    let w = [grad[0] / q, grad[1] / q];
    let gi = [[1.0 - w[0] * w[0], -w[0] * w[1]], [-w[0] * w[1], 1.0 - w[1] * w[1]]];
    let a = [[hess[0][0] / q, hess[0][1] / q], [hess[1][0] / q, hess[1][1] / q]];
    // M = g⁻¹A; H = tr M, K = det M, |A|² = tr M².
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = gi[i][0] * a[0][j] + gi[i][1] * a[1][j];
        }
    }
    let h = m[0][0] + m[1][1];
    let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    let k = det / (q * q * q * q);
    let a2 = m[0][0] * m[0][0] + 2.0 * m[0][1] * m[1][0] + m[1][1] * m[1][1];
    (h, k, a2)
}

/// Computes every quantity of [`GeometryBundle`] for the graph of `u`.
pub fn geometry_bundle(u: &ScalarField, domain: &DiscreteDomain) -> Result<GeometryBundle> {
    u.check_finite("u")?;
    let n = domain.len();
    let gradient = domain.gradient(u);
    let hessian = domain.hessian(u);
    let mut q = vec![0.0; n];
    let (mut wx, mut wy) = (vec![0.0; n], vec![0.0; n]);
    let (mut hnd, mut kk, mut a2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut gxx, mut gxy, mut gyy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut bxx, mut bxy, mut byy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let g = gradient.get(k);
        let hs = hessian.get(k);
        q[k] = area_element(g[0], g[1]);
        wx[k] = g[0] / q[k];
        wy[k] = g[1] / q[k];
        let (h, kc, a) = pointwise(g, hs);
        hnd[k] = h;
        kk[k] = kc;
        a2[k] = a;
        gxx[k] = 1.0 - wx[k] * wx[k];
        gxy[k] = -wx[k] * wy[k];
        gyy[k] = 1.0 - wy[k] * wy[k];
        bxx[k] = hs[0][0] / q[k];
        bxy[k] = hs[0][1] / q[k];
        byy[k] = hs[1][1] / q[k];
    }
    let w = VectorField::new(wx, wy);
    let dw1 = domain.gradient(&ScalarField::new(w.x().to_vec()));
    let dw2 = domain.gradient(&ScalarField::new(w.y().to_vec()));
    let kdw: Vec<f64> = (0..n).map(|k| dw1.x()[k] * dw2.y()[k] - dw1.y()[k] * dw2.x()[k]).collect();
    let hdiv = domain.mean_curvature_flux(u);
    let interior = |k: &usize| domain.class(*k) == NodeClass::Interior;
    let h_discrepancy = (0..n).filter(interior).map(|k| (hdiv.get(k) - hnd[k]).abs()).fold(0.0, f64::max);
    let k_discrepancy = (0..n).filter(interior).map(|k| (kdw[k] - kk[k]).abs()).fold(0.0, f64::max);
    let bundle = GeometryBundle {
        gradient,
        hessian,
        area_element: ScalarField::new(q),
        w,
        mean_curvature: hdiv,
        mean_curvature_nd: ScalarField::new(hnd),
        gauss_curvature: ScalarField::new(kk),
        gauss_curvature_dw: ScalarField::new(kdw),
        a2: ScalarField::new(a2),
        g_inv: TensorField::new(gxx, gxy, gyy),
        second_form: TensorField::new(bxx, bxy, byy),
        h_discrepancy,
        k_discrepancy,
    };
    bundle.mean_curvature.check_finite("H")?;
    bundle.a2.check_finite("|A|²")?;
    bundle.gauss_curvature_dw.check_finite("det Dw")?;
    Ok(bundle)
}

impl GeometryBundle {
    /// max |A2 − (H_nd² − 2K)| over all nodes.
    pub fn a2_identity_residual(&self) -> f64 {
        let (h, k, a) = (self.mean_curvature_nd.values(), self.gauss_curvature.values(), self.a2.values());
        (0..a.len()).map(|i| (a[i] - (h[i] * h[i] - 2.0 * k[i])).abs()).fold(0.0, f64::max)
    }

    /// Writes one CSV row per node with every scalar of the bundle.
    pub fn write_csv(&self, domain: &DiscreteDomain, w: impl std::io::Write) -> Result<()> {
        domain.write_csv(
            w,
            &[
                ("Q", self.area_element.values()),
                ("w_x", self.w.x()),
                ("w_y", self.w.y()),
                ("H", self.mean_curvature.values()),
                ("H_nd", self.mean_curvature_nd.values()),
                ("K", self.gauss_curvature.values()),
                ("K_dw", self.gauss_curvature_dw.values()),
                ("A2", self.a2.values()),
            ],
        )
    }
}

/// Per-node terms of `(1/Q²)|D²u|² ≥ |A|²_g ≥ (1/Q⁶)|D²u|²`.
#[derive(Debug, Clone)]
pub struct HessianBoundReport {
    pub upper: Vec<f64>,
    pub middle: Vec<f64>,
    pub lower: Vec<f64>,
    /// max of (middle − upper)/max(upper, 1) over nodes.
    pub max_upper_violation: f64,
    /// max of (lower − middle)/max(middle, 1) over nodes.
    pub max_lower_violation: f64,
    /// Nodes where either side fails by more than `tol`.
    pub violations: usize,
    pub tol: f64,
}

/// Evaluates the Hessian/second-form inequality chain at every node.
pub fn hessian_bound_check(bundle: &GeometryBundle, tol: f64) -> HessianBoundReport {
    let n = bundle.a2.len();
    let hs2 = bundle.hessian.frobenius_sq();
    let (mut upper, mut middle, mut lower) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut vu, mut vl, mut count) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
    for k in 0..n {
        let q2 = bundle.area_element.get(k).powi(2);
        let up = hs2.get(k) / q2;
        let lo = hs2.get(k) / (q2 * q2 * q2);
        let mid = bundle.a2.get(k);
        vu = vu.max((mid - up) / up.max(1.0));
        vl = vl.max((lo - mid) / mid.max(1.0));
        if mid > up + tol || lo > mid + tol {
            count += 1;
        }
        upper.push(up);
        middle.push(mid);
        lower.push(lo);
    }
    HessianBoundReport { upper, middle, lower, max_upper_violation: vu, max_lower_violation: vl, violations: count, tol }
}
