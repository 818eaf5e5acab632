//! Geometry of ∂Ω and of the boundary curve of graph(u).
//!
//! Every component is positively oriented with respect to Ω (Ω on the left),
//! ν is the outward normal with ν¹ = τ², ν² = −τ¹, and κ is defined by
//! c″ = −κ ν, so κ ≥ 0 on convex parts.

use std::f64::consts::PI;

use crate::analytic::AnalyticField;
use crate::graphgeom::GeometryBundle;
use crate::grid::{DiscreteDomain, ScalarField, Shape};
use crate::{Error, Result};

/// One closed component of ∂Ω sampled uniformly in arclength.
#[derive(Debug, Clone)]
pub struct CurveComponent {
    pub s: Vec<f64>,
    pub length: f64,
    pub position: Vec<[f64; 2]>,
    pub tangent: Vec<[f64; 2]>,
    pub normal: Vec<[f64; 2]>,
    pub curvature: Vec<f64>,
    /// Domain node sitting at the sample, if any.
    pub node: Vec<Option<usize>>,
}

impl CurveComponent {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Uniform arclength spacing.
    pub fn ds(&self) -> f64 {
        self.length / self.len() as f64
    }

    /// Periodic trapezoid rule `∮ f ds`.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mut acc = crate::grid::Accumulator::default();
        for i in 0..self.len() {
            acc.add(f(i));
        }
        acc.sum() * self.ds()
    }

    fn from_samples(position: Vec<[f64; 2]>, tangent: Vec<[f64; 2]>, curvature: Vec<f64>, length: f64) -> Self {
        let n = position.len();
        let normal = tangent.iter().map(|t| [t[1], -t[0]]).collect();
        CurveComponent {
            s: (0..n).map(|i| length * i as f64 / n as f64).collect(),
            length,
            position,
            tangent,
            normal,
            curvature,
            node: vec![None; n],
        }
    }
}

/// Arclength-sampled ∂Ω.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub components: Vec<CurveComponent>,
    /// χ(Ω) = 2 − m for an m-fold connected domain.
    pub euler_characteristic: i32,
}

impl BoundaryCurve {
    /// Circle of `n` samples; `outer` selects counter-clockwise orientation
    /// (outer boundary) versus clockwise (a hole).
    pub fn circle(center: [f64; 2], radius: f64, n: usize, outer: bool) -> CurveComponent {
        let sign = if outer { 1.0 } else { -1.0 };
        let mut pos = Vec::with_capacity(n);
        let mut tan = Vec::with_capacity(n);
        for i in 0..n {
            let th = sign * 2.0 * PI * i as f64 / n as f64;
            let (s, c) = th.sin_cos();
            pos.push([center[0] + radius * c, center[1] + radius * s]);
            tan.push([-sign * s, sign * c]);
        }
        CurveComponent::from_samples(pos, tan, vec![sign / radius; n], 2.0 * PI * radius)
    }

    /// Closed curve `t ↦ c(t)`, t ∈ [0, 2π), traversed counter-clockwise,
    /// resampled at `n` equal arclength steps. `f` returns (c, c′, c″).
    pub fn parametric(f: impl Fn(f64) -> [[f64; 2]; 3], n: usize) -> CurveComponent {
        let m = 64 * n;
        let dt = 2.0 * PI / m as f64;
        let speed = |t: f64| {
            let d = f(t)[1];
            d[0].hypot(d[1])
        };
        let mut cum = vec![0.0; m + 1];
        for i in 0..m {
            // Simpson on each fine step.
            let t = i as f64 * dt;
            cum[i + 1] = cum[i] + dt / 6.0 * (speed(t) + 4.0 * speed(t + 0.5 * dt) + speed(t + dt));
        }
        let length = cum[m];
        let (mut pos, mut tan, mut kap) = (Vec::new(), Vec::new(), Vec::new());
        let mut seg = 0;
        for i in 0..n {
            let target = length * i as f64 / n as f64;
            while cum[seg + 1] < target {
                seg += 1;
            }
            let mut t = (seg as f64 + (target - cum[seg]) / (cum[seg + 1] - cum[seg])) * dt;
            // One Newton step against the local Simpson arclength.
            let t0 = seg as f64 * dt;
            let local = (t - t0) / 6.0 * (speed(t0) + 4.0 * speed(0.5 * (t0 + t)) + speed(t));
            t -= (cum[seg] + local - target) / speed(t);
            let [c, d1, d2] = f(t);
            let v = d1[0].hypot(d1[1]);
            pos.push(c);
            tan.push([d1[0] / v, d1[1] / v]);
            kap.push((d1[0] * d2[1] - d1[1] * d2[0]) / (v * v * v));
        }
        CurveComponent::from_samples(pos, tan, kap, length)
    }

    /// Ellipse with semi-axes `a`, `b`.
    pub fn ellipse(center: [f64; 2], a: f64, b: f64, n: usize) -> CurveComponent {
        Self::parametric(
            |t| {
                let (s, c) = t.sin_cos();
                [[center[0] + a * c, center[1] + b * s], [-a * s, b * c], [-a * c, -b * s]]
            },
            n,
        )
    }

    /// Boundary of a disk or annulus domain. Polar domains sample exactly at
    /// their boundary-ring nodes; Cartesian domains sample the circles at
    /// spacing ≈ h.
    pub fn of_domain(domain: &DiscreteDomain) -> Result<Self> {
        let (center, circles) = match domain.shape() {
            Shape::Disk { center, radius } => (center, vec![(radius, true)]),
            Shape::Annulus { center, inner, outer } => (center, vec![(outer, true), (inner, false)]),
            Shape::Rectangle { .. } => {
                return Err(Error::Precondition("boundary curves need a C² boundary; rectangles have corners".into()))
            }
        };
        let mut components = Vec::new();
        if let Some(info) = domain.polar_info() {
            for (radius, outer) in circles {
                let ring = if outer { info.n_rings - 1 } else { 0 };
                let mut nodes = domain.ring(ring);
                if nodes.len() != info.n_theta {
                    return Err(Error::Precondition(format!("boundary ring {} is incomplete", ring)));
                }
                let mut c = Self::circle(center, radius, info.n_theta, outer);
                if !outer {
                    nodes[1..].reverse();
                }
                for (i, &k) in nodes.iter().enumerate() {
                    c.position[i] = domain.position(k);
                    c.node[i] = Some(k);
                }
                components.push(c);
            }
        } else {
            for (radius, outer) in circles {
                let n = ((2.0 * PI * radius / domain.h()).ceil() as usize).max(16);
                components.push(Self::circle(center, radius, n, outer));
            }
        }
        Ok(BoundaryCurve { components, euler_characteristic: domain.euler_characteristic() })
    }

    pub fn from_components(components: Vec<CurveComponent>) -> Self {
        let m = components.len() as i32;
        BoundaryCurve { components, euler_characteristic: 2 - m }
    }

    pub fn total_length(&self) -> f64 {
        self.components.iter().map(|c| c.length).sum()
    }

    /// ∮ κ ds over all components; equals 2πχ(Ω) for planar domains.
    pub fn total_turning(&self) -> f64 {
        self.components.iter().map(|c| c.integrate(|i| c.curvature[i])).sum()
    }

    /// Largest sample spacing.
    pub fn max_ds(&self) -> f64 {
        self.components.iter().map(|c| c.ds()).fold(0.0, f64::max)
    }
}

/// Value and gradient of a nodal field at every boundary sample.
///
/// Samples on nodes use the nodal value and discrete gradient; other samples
/// use a second-order Taylor expansion about the nearest node.
pub fn sample_field(domain: &DiscreteDomain, u: &ScalarField, curve: &BoundaryCurve) -> Vec<Vec<(f64, [f64; 2])>> {
    let grad = domain.gradient(u);
    let hess = domain.hessian(u);
    let mut nearest = NearestNode::new(domain);
    curve
        .components
        .iter()
        .map(|c| {
            (0..c.len())
                .map(|i| {
                    let k = c.node[i].unwrap_or_else(|| nearest.find(c.position[i]));
                    let x = domain.position(k);
                    let d = [c.position[i][0] - x[0], c.position[i][1] - x[1]];
                    let g = grad.get(k);
                    let hs = hess.get(k);
                    let hd = [hs[0][0] * d[0] + hs[0][1] * d[1], hs[1][0] * d[0] + hs[1][1] * d[1]];
                    let val = u.get(k) + g[0] * d[0] + g[1] * d[1] + 0.5 * (d[0] * hd[0] + d[1] * hd[1]);
                    (val, [g[0] + hd[0], g[1] + hd[1]])
                })
                .collect()
        })
        .collect()
}

/// Bucketed nearest-node lookup.
struct NearestNode<'a> {
    domain: &'a DiscreteDomain,
    cell: f64,
    origin: [f64; 2],
    dims: (usize, usize),
    buckets: Vec<Vec<usize>>,
}

impl<'a> NearestNode<'a> {
    fn new(domain: &'a DiscreteDomain) -> Self {
        let ps = domain.positions();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in ps {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        // Bucket count tracks the node count, not the nominal spacing.
        let spread = ((hi[0] - lo[0]) * (hi[1] - lo[1]) / ps.len().max(1) as f64).sqrt();
        let cell = (2.0 * domain.h()).max(2.0 * spread);
        let dims = (((hi[0] - lo[0]) / cell) as usize + 1, ((hi[1] - lo[1]) / cell) as usize + 1);
        let mut buckets = vec![Vec::new(); dims.0 * dims.1];
        for (k, p) in ps.iter().enumerate() {
            let (i, j) = (((p[0] - lo[0]) / cell) as usize, ((p[1] - lo[1]) / cell) as usize);
            buckets[i * dims.1 + j].push(k);
        }
        NearestNode { domain, cell, origin: lo, dims, buckets }
    }

    fn find(&mut self, p: [f64; 2]) -> usize {
        let ci = ((p[0] - self.origin[0]) / self.cell).floor() as isize;
        let cj = ((p[1] - self.origin[1]) / self.cell).floor() as isize;
        let mut best = (f64::INFINITY, 0);
        for reach in 1..isize::MAX {
            for i in ci - reach..=ci + reach {
                for j in cj - reach..=cj + reach {
                    if i < 0 || j < 0 || i >= self.dims.0 as isize || j >= self.dims.1 as isize {
                        continue;
                    }
                    for &k in &self.buckets[i as usize * self.dims.1 + j as usize] {
                        let x = self.domain.position(k);
                        let d = (x[0] - p[0]).hypot(x[1] - p[1]);
                        if d < best.0 {
                            best = (d, k);
                        }
                    }
                }
            }
            if best.0 < (reach - 1).max(0) as f64 * self.cell || reach > (self.dims.0 + self.dims.1) as isize {
                break;
            }
            if best.0.is_finite() && best.0 <= reach as f64 * self.cell {
                break;
            }
        }
        best.1
    }
}

/// Traces of the boundary data and of u along one component.
#[derive(Debug, Clone, Default)]
pub struct TraceComponent {
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub d2phi: Vec<f64>,
    /// ∂u/∂ν.
    pub u_nu: Vec<f64>,
    /// u at the sample (to check it matches φ).
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct BoundaryTrace {
    pub components: Vec<TraceComponent>,
}

/// Periodic fourth-order first and second differences.
pub fn periodic_derivatives(f: &[f64], ds: f64) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let at = |i: isize| f[i.rem_euclid(n as isize) as usize];
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for i in 0..n as isize {
        let (m2, m1, z, p1, p2) = (at(i - 2), at(i - 1), at(i), at(i + 1), at(i + 2));
        d1.push((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * ds));
        d2.push((-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * ds * ds));
    }
    (d1, d2)
}

impl BoundaryTrace {
    /// Traces of `u` with φ := u|∂Ω and arclength derivatives of φ by
    /// periodic differences.
    pub fn from_field(domain: &DiscreteDomain, u: &ScalarField, curve: &BoundaryCurve) -> Self {
        let samples = sample_field(domain, u, curve);
        let components = curve
            .components
            .iter()
            .zip(samples)
            .map(|(c, smp)| {
                let phi: Vec<f64> = smp.iter().map(|s| s.0).collect();
                let (dphi, d2phi) = periodic_derivatives(&phi, c.ds());
                let u_nu = smp.iter().zip(&c.normal).map(|(s, n)| s.1[0] * n[0] + s.1[1] * n[1]).collect();
                TraceComponent { u: phi.clone(), phi, dphi, d2phi, u_nu }
            })
            .collect();
        BoundaryTrace { components }
    }

    /// Traces with φ given in closed form on Ω̄ (derivatives by the chain
    /// rule) and ∂u/∂ν, u taken from the nodal field.
    pub fn with_data(domain: &DiscreteDomain, u: &ScalarField, curve: &BoundaryCurve, phi: &dyn AnalyticField) -> Self {
        let samples = sample_field(domain, u, curve);
        let components = curve
            .components
            .iter()
            .zip(samples)
            .map(|(c, smp)| analytic_component(c, phi, &smp))
            .collect();
        BoundaryTrace { components }
    }

    /// Traces of a closed-form φ alone with prescribed ∂u/∂ν per component.
    pub fn of_data(curve: &BoundaryCurve, phi: &dyn AnalyticField, u_nu: &[Vec<f64>]) -> Self {
        let components = curve
            .components
            .iter()
            .zip(u_nu)
            .map(|(c, un)| {
                let smp: Vec<(f64, [f64; 2])> = (0..c.len())
                    .map(|i| {
                        let n = c.normal[i];
                        let t = c.tangent[i];
                        let g = phi.gradient(c.position[i]);
                        let dt = g[0] * t[0] + g[1] * t[1];
                        (phi.value(c.position[i]), [dt * t[0] + un[i] * n[0], dt * t[1] + un[i] * n[1]])
                    })
                    .collect();
                analytic_component(c, phi, &smp)
            })
            .collect();
        BoundaryTrace { components }
    }

    /// max |u − φ| over all samples.
    pub fn mismatch(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.u.iter().zip(&c.phi).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

fn analytic_component(c: &CurveComponent, phi: &dyn AnalyticField, smp: &[(f64, [f64; 2])]) -> TraceComponent {
    let mut t = TraceComponent::default();
    for i in 0..c.len() {
        let p = c.position[i];
        let (tau, nu) = (c.tangent[i], c.normal[i]);
        let g = phi.gradient(p);
        let hs = phi.hessian(p);
        let tht = tau[0] * (hs[0][0] * tau[0] + hs[0][1] * tau[1]) + tau[1] * (hs[1][0] * tau[0] + hs[1][1] * tau[1]);
        t.phi.push(phi.value(p));
        t.dphi.push(g[0] * tau[0] + g[1] * tau[1]);
        // (φ∘c)″ = τᵀD²φτ + ∇φ·c″ with c″ = −κν.
        t.d2phi.push(tht - c.curvature[i] * (g[0] * nu[0] + g[1] * nu[1]));
        t.u.push(smp[i].0);
        t.u_nu.push(smp[i].1[0] * nu[0] + smp[i].1[1] * nu[1]);
    }
    t
}

/// Geodesic curvature of ∂graph(u) and its integrals.
#[derive(Debug, Clone)]
pub struct GeodesicCurvature {
    pub kappa_g: Vec<Vec<f64>>,
    /// ∮ κ_g ds (with the surface line element).
    pub total: f64,
    /// ∮ |κ_g| ds.
    pub total_abs: f64,
    /// ∮ (|φ″| + |κ|) ds over ∂Ω.
    pub bound_rhs: f64,
}

/// κ_g = (−u_ν φ″ + κ(1+φ′²)) / ((1+φ′²+u_ν²)^{1/2}(1+φ′²)^{3/2}).
pub fn geodesic_curvature_at(kappa: f64, dphi: f64, d2phi: f64, u_nu: f64) -> f64 {
    let a = 1.0 + dphi * dphi;
    (-u_nu * d2phi + kappa * a) / ((a + u_nu * u_nu).sqrt() * a.powf(1.5))
}

/// Geodesic curvature per sample. The line element of the lifted curve is
/// √(1+φ′²) ds.
pub fn geodesic_curvature(trace: &BoundaryTrace, curve: &BoundaryCurve) -> GeodesicCurvature {
    let mut kappa_g = Vec::new();
    let (mut total, mut total_abs, mut rhs) = (0.0, 0.0, 0.0);
    for (c, t) in curve.components.iter().zip(&trace.components) {
        let kg: Vec<f64> =
            (0..c.len()).map(|i| geodesic_curvature_at(c.curvature[i], t.dphi[i], t.d2phi[i], t.u_nu[i])).collect();
        let line = |i: usize| (1.0 + t.dphi[i] * t.dphi[i]).sqrt();
        total += c.integrate(|i| kg[i] * line(i));
        total_abs += c.integrate(|i| kg[i].abs() * line(i));
        rhs += c.integrate(|i| t.d2phi[i].abs() + c.curvature[i].abs());
        kappa_g.push(kg);
    }
    GeodesicCurvature { kappa_g, total, total_abs, bound_rhs: rhs }
}

/// Normal curvature κ_N = Y″·N / |Y′|² of the lifted boundary curve
/// Y = (c, φ) with upward unit normal N = (−∇u, 1)/Q.
pub fn normal_curvature(trace: &BoundaryTrace, curve: &BoundaryCurve, tol: f64) -> Result<Vec<Vec<f64>>> {
    let mismatch = trace.mismatch();
    if mismatch > tol {
        return Err(Error::Precondition(format!("u differs from φ on ∂Ω by {:e} (tolerance {:e})", mismatch, tol)));
    }
    Ok(curve
        .components
        .iter()
        .zip(&trace.components)
        .map(|(c, t)| {
            (0..c.len())
                .map(|i| {
                    let (tau, nu) = (c.tangent[i], c.normal[i]);
                    // ∇u on ∂Ω = φ′τ + u_ν ν.
                    let g = [t.dphi[i] * tau[0] + t.u_nu[i] * nu[0], t.dphi[i] * tau[1] + t.u_nu[i] * nu[1]];
                    let q = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
                    let y2 = [-c.curvature[i] * nu[0], -c.curvature[i] * nu[1], t.d2phi[i]];
                    let n = [-g[0] / q, -g[1] / q, 1.0 / q];
                    let y1sq = 1.0 + t.dphi[i] * t.dphi[i];
                    (y2[0] * n[0] + y2[1] * n[1] + y2[2] * n[2]) / y1sq
                })
                .collect()
        })
        .collect())
}

/// |∫ K Q dx + ∮ κ_g ds − 2πχ(Ω)|.
pub fn gauss_bonnet_residual(domain: &DiscreteDomain, bundle: &GeometryBundle, kg: &GeodesicCurvature, chi: i32) -> f64 {
    let total_gauss = domain.integrate_with(|k| bundle.gauss_curvature.get(k) * bundle.area_element.get(k));
    (total_gauss + kg.total - 2.0 * PI * chi as f64).abs()
}

/// (‖φ‖_{W^{2,1}(∂Ω)}, ‖κ‖_{L¹(∂Ω)}).
pub fn boundary_norms(trace: &BoundaryTrace, curve: &BoundaryCurve) -> (f64, f64) {
    let mut phi_norm = 0.0;
    let mut kappa_norm = 0.0;
    for (c, t) in curve.components.iter().zip(&trace.components) {
        phi_norm += c.integrate(|i| t.phi[i].abs() + t.dphi[i].abs() + t.d2phi[i].abs());
        kappa_norm += c.integrate(|i| c.curvature[i].abs());
    }
    (phi_norm, kappa_norm)
}

/// Writes `s,kappa,phi,dphi,d2phi,u_nu,kappa_g,kappa_N` rows.
pub fn write_csv(
    mut w: impl std::io::Write,
    curve: &BoundaryCurve,
    trace: &BoundaryTrace,
    kg: &GeodesicCurvature,
    kn: &[Vec<f64>],
) -> Result<()> {
    writeln!(w, "s,kappa,phi,dphi,d2phi,u_nu,kappa_g,kappa_N")?;
    for (ci, (c, t)) in curve.components.iter().zip(&trace.components).enumerate() {
        for i in 0..c.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                c.s[i], c.curvature[i], t.phi[i], t.dphi[i], t.d2phi[i], t.u_nu[i], kg.kappa_g[ci][i], kn[ci][i]
            )?;
        }
    }
    Ok(())
}
