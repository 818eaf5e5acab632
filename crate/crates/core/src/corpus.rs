//! Singular example fields and their smooth approximating sequences.
//!
//! Every example is of the form `u(x) = A(x)·P(|x|)` with a radial profile
//! `P` and `A = ε x¹` (point singularities at the origin) or `A = 1`
//! (singular circle r = 1).

use serde::Serialize;

use crate::analytic::{smootherstep, AnalyticField};
use crate::energy::willmore_w0;
use crate::graphgeom::geometry_bundle;
use crate::grid::{Cut, DiscreteDomain, DomainSpec, Excision, ScalarField, Shape, TensorField, VectorField};
use crate::{Error, Result};

/// Inner and outer ends of the quintic blend that glues the point-singular
/// profiles to zero.
const GLUE: (f64, f64) = (0.5, 0.75);
/// Half-height of the window around the singular circle where the
/// cylinder ramp departs from the target profile.
const RAMP_WINDOW: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExampleId {
    /// `ε x¹ log|log r|` on the unit disk.
    #[serde(rename = "logloglinear")]
    LogLogLinear,
    /// Radial `sgn(1−r)|1−r|^{1/k}` profile on the disk of radius 2.
    #[serde(rename = "radial_k")]
    RadialK,
    /// The radial profile raised by a jump inside r = 1.
    #[serde(rename = "radial_k_cylinder")]
    RadialKCylinder,
    /// `x¹ (−log r)^{1/2}` on the unit disk.
    #[serde(rename = "sqrtlog")]
    SqrtLog,
}

impl ExampleId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "logloglinear" => Ok(ExampleId::LogLogLinear),
            "radial_k" => Ok(ExampleId::RadialK),
            "radial_k_cylinder" => Ok(ExampleId::RadialKCylinder),
            "sqrtlog" => Ok(ExampleId::SqrtLog),
            _ => Err(Error::Config(format!("unknown example id '{}'", s))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ExampleId::LogLogLinear => "logloglinear",
            ExampleId::RadialK => "radial_k",
            ExampleId::RadialKCylinder => "radial_k_cylinder",
            ExampleId::SqrtLog => "sqrtlog",
        }
    }
}

/// Where the example fails to be smooth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Singularity {
    Point { center: [f64; 2] },
    Circle { center: [f64; 2], radius: f64 },
}

/// Example parameters; unused entries are ignored by the other examples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExampleParams {
    pub epsilon: f64,
    pub k: u32,
    pub jump: f64,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams { epsilon: 1.0, k: 3, jump: 1.0 }
    }
}

/// One of the singular examples, evaluable off its singular set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExampleField {
    pub id: ExampleId,
    pub params: ExampleParams,
}

impl ExampleField {
    pub fn new(id: ExampleId, params: ExampleParams) -> Result<Self> {
        match id {
            ExampleId::RadialK | ExampleId::RadialKCylinder => {
                if params.k < 3 || params.k % 2 == 0 {
                    return Err(Error::Parameter(format!("k must be an odd integer ≥ 3, got {}", params.k)));
                }
            }
            ExampleId::LogLogLinear | ExampleId::SqrtLog => {}
        }
        if !params.epsilon.is_finite() || !params.jump.is_finite() || params.jump < 0.0 {
            return Err(Error::Parameter(format!("invalid example parameters {:?}", params)));
        }
        Ok(ExampleField { id, params })
    }

    pub fn log_log_linear(epsilon: f64) -> Self {
        ExampleField { id: ExampleId::LogLogLinear, params: ExampleParams { epsilon, ..Default::default() } }
    }

    pub fn sqrt_log() -> Self {
        ExampleField { id: ExampleId::SqrtLog, params: ExampleParams::default() }
    }

    pub fn radial_k(k: u32) -> Result<Self> {
        ExampleField::new(ExampleId::RadialK, ExampleParams { k, ..Default::default() })
    }

    pub fn radial_k_cylinder(k: u32, jump: f64) -> Result<Self> {
        ExampleField::new(ExampleId::RadialKCylinder, ExampleParams { k, jump, ..Default::default() })
    }

    /// The domain the example lives on.
    pub fn shape(&self) -> Shape {
        match self.id {
            ExampleId::LogLogLinear | ExampleId::SqrtLog => Shape::unit_disk(),
            ExampleId::RadialK | ExampleId::RadialKCylinder => Shape::Disk { center: [0.0; 2], radius: 2.0 },
        }
    }

    pub fn singularity(&self) -> Singularity {
        match self.id {
            ExampleId::LogLogLinear | ExampleId::SqrtLog => Singularity::Point { center: [0.0; 2] },
            _ => Singularity::Circle { center: [0.0; 2], radius: 1.0 },
        }
    }

    /// Ball or collar of width δ around the singular set.
    pub fn excision(&self, delta: f64) -> Excision {
        match self.singularity() {
            Singularity::Point { center } => Excision::Point { center, radius: delta },
            Singularity::Circle { center, radius } => Excision::Collar { center, radius, half_width: delta },
        }
    }

    /// Flagged facets for the singular circle.
    pub fn cut(&self) -> Option<Cut> {
        match self.singularity() {
            Singularity::Point { .. } => None,
            Singularity::Circle { center, radius } => Some(Cut::Circle { center, radius }),
        }
    }

    /// Radial interval where the field is the unglued closed-form profile.
    pub fn pure_region(&self) -> (f64, f64) {
        match self.id {
            ExampleId::LogLogLinear | ExampleId::SqrtLog => (0.0, GLUE.0),
            _ => (0.75, 1.25),
        }
    }

    /// Analytic ∇u and D²u are available off the singular set.
    pub fn has_analytic_derivatives(&self) -> bool {
        true
    }

    /// Largest smoothing scale whose radial convolution leaves the boundary
    /// data untouched.
    pub fn max_smoothing(&self) -> f64 {
        match self.id {
            ExampleId::LogLogLinear | ExampleId::SqrtLog => 1.0 - GLUE.1,
            _ => 0.5,
        }
    }

    /// Default coarsest smoothing scale σ₀.
    pub fn default_sigma0(&self) -> f64 {
        match self.id {
            ExampleId::LogLogLinear | ExampleId::SqrtLog => 0.25,
            _ => 0.5,
        }
    }

    fn angular(&self) -> Angular {
        match self.id {
            ExampleId::LogLogLinear => Angular::X1(self.params.epsilon),
            ExampleId::SqrtLog => Angular::X1(1.0),
            _ => Angular::One,
        }
    }

    /// Radial profile `(P, P′, P″)` at r > 0 off the singular set.
    pub fn profile(&self, r: f64) -> [f64; 3] {
        match self.id {
            ExampleId::LogLogLinear => glued(r, loglog),
            ExampleId::SqrtLog => glued(r, sqrtlog),
            ExampleId::RadialK => radial_profile(r, self.params.k),
            ExampleId::RadialKCylinder => {
                let mut p = radial_profile(r, self.params.k);
                if r < 1.0 {
                    p[0] += self.params.jump;
                }
                p
            }
        }
    }

    /// True on the singular set itself, where derivatives do not exist.
    pub fn is_singular(&self, p: [f64; 2]) -> bool {
        let r = p[0].hypot(p[1]);
        match self.singularity() {
            Singularity::Point { .. } => r == 0.0,
            Singularity::Circle { radius, .. } => r == radius,
        }
    }

    fn eval(&self, p: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let r = p[0].hypot(p[1]);
        if self.is_singular(p) {
            return (0.0, [f64::NAN; 2], [[f64::NAN; 2]; 2]);
        }
        compose(p, self.angular(), self.profile(r))
    }
}

impl AnalyticField for ExampleField {
    fn value(&self, p: [f64; 2]) -> f64 {
        self.eval(p).0
    }
    fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        self.eval(p).1
    }
    fn hessian(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        self.eval(p).2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Angular {
    One,
    X1(f64),
}

/// `A(x)·P(r)` with its gradient and Hessian.
fn compose(p: [f64; 2], a: Angular, prof: [f64; 3]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let r = p[0].hypot(p[1]);
    let [f, f1, f2] = prof;
    // ∂_i P and ∂_ij P; at r = 0 the profile is even and smooth.
    let (dp, ddp) = if r == 0.0 {
        ([0.0; 2], [[f2, 0.0], [0.0, f2]])
    } else {
        let e = [p[0] / r, p[1] / r];
        let mut dd = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                dd[i][j] = f2 * e[i] * e[j] + f1 * (delta - e[i] * e[j]) / r;
            }
        }
        ([f1 * e[0], f1 * e[1]], dd)
    };
    match a {
        Angular::One => (f, dp, ddp),
        Angular::X1(eps) => {
            let x = p[0];
            let g = [eps * (f + x * dp[0]), eps * x * dp[1]];
            let h = [
                [eps * (2.0 * dp[0] + x * ddp[0][0]), eps * (dp[1] + x * ddp[0][1])],
                [eps * (dp[1] + x * ddp[1][0]), eps * x * ddp[1][1]],
            ];
            (eps * x * f, g, h)
        }
    }
}

fn loglog(r: f64) -> [f64; 3] {
    let l = r.ln();
    [(-l).ln(), 1.0 / (r * l), -(l + 1.0) / (r * r * l * l)]
}

fn sqrtlog(r: f64) -> [f64; 3] {
    let m = -r.ln();
    let s = m.sqrt();
    [s, -0.5 / (r * s), 0.5 / (r * r * s) - 0.25 / (r * r * s * m)]
}

/// `F(r)·(1 − S)` with the quintic blend over [`GLUE`].
fn glued(r: f64, f: fn(f64) -> [f64; 3]) -> [f64; 3] {
    if r >= GLUE.1 {
        return [0.0; 3];
    }
    let fv = f(r);
    if r <= GLUE.0 {
        return fv;
    }
    let w = GLUE.1 - GLUE.0;
    let (s, s1, s2) = smootherstep((r - GLUE.0) / w);
    let (c, c1, c2) = (1.0 - s, -s1 / w, -s2 / (w * w));
    [fv[0] * c, fv[1] * c + fv[0] * c1, fv[2] * c + 2.0 * fv[1] * c1 + fv[0] * c2]
}

/// `sgn(1−r)|1−r|^{1/k}` with its r-derivatives.
fn power_profile(r: f64, k: u32) -> [f64; 3] {
    let t = 1.0 - r;
    let a = 1.0 / k as f64;
    let m = t.abs();
    let v = t.signum() * m.powf(a);
    let d1 = -a * m.powf(a - 1.0);
    let d2 = t.signum() * a * (a - 1.0) * m.powf(a - 2.0);
    [v, d1, d2]
}

/// The nonincreasing profile: 1 on [0, 1/2], power law on [3/4, 5/4], −1 on
/// [3/2, 2], quintic blends in between.
pub fn radial_profile(r: f64, k: u32) -> [f64; 3] {
    if r <= 0.5 {
        [1.0, 0.0, 0.0]
    } else if r < 0.75 {
        let v = power_profile(r, k);
        let (s, s1, s2) = smootherstep((r - 0.5) * 4.0);
        let (s1, s2) = (4.0 * s1, 16.0 * s2);
        // 1 − (1 − V)·S
        [1.0 - (1.0 - v[0]) * s, v[1] * s - (1.0 - v[0]) * s1, v[2] * s + 2.0 * v[1] * s1 - (1.0 - v[0]) * s2]
    } else if r <= 1.25 {
        power_profile(r, k)
    } else if r < 1.5 {
        let v = power_profile(r, k);
        let (s, s1, s2) = smootherstep((r - 1.25) * 4.0);
        let (c, c1, c2) = (1.0 - s, -4.0 * s1, -16.0 * s2);
        // −1 + (V + 1)·(1 − S)
        [-1.0 + (v[0] + 1.0) * c, v[1] * c + (v[0] + 1.0) * c1, v[2] * c + 2.0 * v[1] * c1 + (v[0] + 1.0) * c2]
    } else {
        [-1.0, 0.0, 0.0]
    }
}

/// Analytic samples of an example on a domain.
#[derive(Debug, Clone)]
pub struct ExampleSample {
    pub u: ScalarField,
    pub gradient: VectorField,
    pub hessian: TensorField,
    /// Nodes on the singular set; their derivative entries are NaN.
    pub singular: Vec<bool>,
}

/// Samples `field` and its analytic derivatives on `domain`.
pub fn build_example(field: &ExampleField, domain: &DiscreteDomain) -> Result<ExampleSample> {
    let want = field.shape();
    let have = domain.shape();
    let compatible = match (want, have) {
        (Shape::Disk { center: c1, radius: r1 }, Shape::Disk { center: c2, radius: r2 }) => c1 == c2 && r1 == r2,
        _ => false,
    };
    if !compatible {
        return Err(Error::Precondition(format!(
            "example {} needs domain {:?}, got {:?}",
            field.id.as_str(),
            want,
            have
        )));
    }
    let evals = sample_radial(domain, |p| field.eval(p));
    let singular = domain.positions().iter().map(|&p| field.is_singular(p)).collect();
    Ok(split(evals, singular))
}

fn split(evals: Vec<(f64, [f64; 2], [[f64; 2]; 2])>, singular: Vec<bool>) -> ExampleSample {
    let n = evals.len();
    let mut u = Vec::with_capacity(n);
    let (mut gx, mut gy) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut hxx, mut hxy, mut hyy) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (v, g, h) in evals {
        u.push(v);
        gx.push(g[0]);
        gy.push(g[1]);
        hxx.push(h[0][0]);
        hxy.push(h[0][1]);
        hyy.push(h[1][1]);
    }
    ExampleSample {
        u: ScalarField::new(u),
        gradient: VectorField::new(gx, gy),
        hessian: TensorField::new(hxx, hxy, hyy),
        singular,
    }
}

fn sample_radial<T: Clone>(domain: &DiscreteDomain, f: impl Fn([f64; 2]) -> T) -> Vec<T> {
    domain.positions().iter().map(|&p| f(p)).collect()
}

/// Evaluates a radial profile once per polar ring (or once per node on
/// Cartesian lattices).
fn profile_per_node(domain: &DiscreteDomain, prof: impl Fn(f64) -> [f64; 3]) -> Vec<[f64; 3]> {
    match domain.polar_info() {
        Some(info) => {
            let rings: Vec<[f64; 3]> = (0..info.n_rings).map(|i| prof(info.radius(i))).collect();
            (0..domain.len()).map(|k| rings[domain.slot(k).0]).collect()
        }
        None => domain.positions().iter().map(|p| prof(p[0].hypot(p[1]))).collect(),
    }
}

// ---------------------------------------------------------------------------
// Smooth approximants

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * z * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// C² kernel `(35/32)(1 − s²)³` on [−1, 1] and its first two derivatives.
fn kernel(s: f64) -> [f64; 3] {
    let q = 1.0 - s * s;
    let c = 35.0 / 32.0;
    [c * q * q * q, -6.0 * c * s * q * q, -6.0 * c * q * (1.0 - 5.0 * s * s)]
}

const GL_POINTS: usize = 64;

/// `(P_σ, P_σ′, P_σ″)` for `P_σ(r) = ∫ P(|r − σs|) k(s) ds`, derivatives via
/// the kernel so that only values of `P` are needed.
///
/// The integral is split at the singular radius and graded there by
/// `s = s* ± y^m`.
fn convolve(p: &dyn Fn(f64) -> f64, r: f64, sigma: f64, singular_radius: f64, grading: i32) -> [f64; 3] {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    let (gx, gw) = RULE.get_or_init(|| gauss_legendre(GL_POINTS));
    convolve_with(p, r, sigma, singular_radius, grading, gx, gw)
}

fn convolve_with(
    p: &dyn Fn(f64) -> f64,
    r: f64,
    sigma: f64,
    singular_radius: f64,
    grading: i32,
    gx: &[f64],
    gw: &[f64],
) -> [f64; 3] {
    let mut acc = [0.0; 3];
    let mut add = |s: f64, wt: f64| {
        let v = p((r - sigma * s).abs());
        let k = kernel(s);
        for i in 0..3 {
            acc[i] += wt * v * k[i];
        }
    };
    let s_star = (r - singular_radius) / sigma;
    if s_star.abs() < 1.0 {
        let m = grading as f64;
        // Left piece [−1, s*] and right piece [s*, 1], both graded at s*.
        for (len, dir) in [(s_star + 1.0, -1.0), (1.0 - s_star, 1.0)] {
            for (&x, &w) in gx.iter().zip(gw) {
                let y = 0.5 * (x + 1.0);
                let s = s_star + dir * len * y.powi(grading);
                add(s, 0.5 * w * len * m * y.powi(grading - 1));
            }
        }
    } else {
        for (&x, &w) in gx.iter().zip(gw) {
            add(x, w);
        }
    }
    [acc[0], -acc[1] / sigma, acc[2] / (sigma * sigma)]
}

/// A smooth member of an approximating sequence.
#[derive(Debug, Clone)]
pub struct Approximant {
    pub target: ExampleField,
    pub j: u32,
    pub sigma: f64,
    kind: ApproxKind,
}

#[derive(Debug, Clone)]
enum ApproxKind {
    /// Radially mollified profile.
    Mollified,
    /// Cylinder replaced by a tilted, C² ramp.
    Ramp,
    /// Smoothing wider than the domain: a smooth interpolant of the data.
    Cap,
}

impl Approximant {
    pub fn is_cap(&self) -> bool {
        matches!(self.kind, ApproxKind::Cap)
    }

    /// Radial profile `(P, P′, P″)` of the approximant.
    pub fn profile(&self, r: f64) -> [f64; 3] {
        let t = &self.target;
        match self.kind {
            ApproxKind::Cap => cap_profile(t, r),
            ApproxKind::Ramp => ramp_profile(r, self.sigma, t.params.k, t.params.jump),
            ApproxKind::Mollified => {
                let (sing, grading) = match t.id {
                    ExampleId::LogLogLinear | ExampleId::SqrtLog => (0.0, 4),
                    _ => (1.0, t.params.k as i32),
                };
                convolve(&|rr| t.profile(rr)[0], r, self.sigma, sing, grading)
            }
        }
    }

    /// Nodal values of the approximant.
    pub fn sample(&self, domain: &DiscreteDomain) -> ScalarField {
        let prof = profile_per_node(domain, |r| self.profile(r));
        let a = self.target.angular();
        ScalarField::new(
            domain.positions().iter().zip(prof).map(|(&p, pr)| compose(p, a, [pr[0], 0.0, 0.0]).0).collect(),
        )
    }

    /// Nodal values with analytic derivatives.
    pub fn sample_with_derivatives(&self, domain: &DiscreteDomain) -> ExampleSample {
        let prof = profile_per_node(domain, |r| self.profile(r));
        let a = self.target.angular();
        let evals = domain.positions().iter().zip(prof).map(|(&p, pr)| compose(p, a, pr)).collect();
        split(evals, vec![false; domain.len()])
    }
}

impl AnalyticField for Approximant {
    fn value(&self, p: [f64; 2]) -> f64 {
        compose(p, self.target.angular(), self.profile(p[0].hypot(p[1]))).0
    }
    fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        compose(p, self.target.angular(), self.profile(p[0].hypot(p[1]))).1
    }
    fn hessian(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        compose(p, self.target.angular(), self.profile(p[0].hypot(p[1]))).2
    }
}

/// Smooth profile with the target's boundary data: zero for the
/// point-singular examples, a quintic descent for the radial ones.
fn cap_profile(t: &ExampleField, r: f64) -> [f64; 3] {
    match t.id {
        ExampleId::LogLogLinear | ExampleId::SqrtLog => [0.0; 3],
        _ => {
            let top = if t.id == ExampleId::RadialKCylinder { 1.0 + t.params.jump } else { 1.0 };
            let (s, s1, s2) = smootherstep(r - 0.5);
            [top - (top + 1.0) * s, -(top + 1.0) * s1, -(top + 1.0) * s2]
        }
    }
}

/// Inverse profile `r = ρ_σ(z)` of the ramped cylinder and its z-derivatives.
///
/// Unperturbed: `1 − z^k` below 0, the cylinder `r = 1` on `[0, J]`,
/// `1 − (z − J)^k` above. The perturbation `−σ·S((z + a)/(J + 2a))` tilts the
/// cylinder so that the inverse is a graph.
fn ramp_inverse(z: f64, sigma: f64, k: u32, jump: f64) -> [f64; 3] {
    let a = RAMP_WINDOW;
    let kf = k as f64;
    let base = if z < 0.0 {
        [1.0 - z.powi(k as i32), -kf * z.powi(k as i32 - 1), -kf * (kf - 1.0) * z.powi(k as i32 - 2)]
    } else if z <= jump {
        [1.0, 0.0, 0.0]
    } else {
        let t = z - jump;
        [1.0 - t.powi(k as i32), -kf * t.powi(k as i32 - 1), -kf * (kf - 1.0) * t.powi(k as i32 - 2)]
    };
    let l = jump + 2.0 * a;
    let (s, s1, s2) = smootherstep((z + a) / l);
    [base[0] - sigma * s, base[1] - sigma * s1 / l, base[2] - sigma * s2 / (l * l)]
}

fn ramp_profile(r: f64, sigma: f64, k: u32, jump: f64) -> [f64; 3] {
    let a = RAMP_WINDOW;
    let ak = a.powi(k as i32);
    if r >= 1.0 + ak {
        return radial_profile(r, k);
    }
    if r <= 1.0 - ak - sigma {
        let mut p = radial_profile(r + sigma, k);
        p[0] += jump;
        return p;
    }
    // ρ_σ is strictly decreasing on [−a, J + a]; bisect then polish.
    let (mut lo, mut hi) = (-a, jump + a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ramp_inverse(mid, sigma, k, jump)[0] > r {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + mid.abs()) {
            break;
        }
    }
    let mut z = 0.5 * (lo + hi);
    let rho = ramp_inverse(z, sigma, k, jump);
    if rho[1] != 0.0 {
        let zn = z - (rho[0] - r) / rho[1];
        if zn > lo && zn < hi {
            z = zn;
        }
    }
    let rho = ramp_inverse(z, sigma, k, jump);
    [z, 1.0 / rho[1], -rho[2] / rho[1].powi(3)]
}

/// Member `j` of the approximating sequence of `target`, at smoothing scale
/// `σ_j = σ₀·2^{−j}`.
///
/// Radial convolution for every example except the cylinder, whose vertical
/// piece is replaced by a tilted ramp of width σ_j. Scales at or above
/// [`ExampleField::max_smoothing`] return the smooth cap interpolant.
pub fn mollified(target: &ExampleField, j: u32, sigma0: f64, h: f64) -> Result<Approximant> {
    if j < 1 {
        return Err(Error::Precondition("sequence index j must be ≥ 1".into()));
    }
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::Parameter(format!("σ₀ must be positive, got {}", sigma0)));
    }
    let sigma = sigma0 * 0.5f64.powi(j as i32);
    if sigma < 4.0 * h {
        return Err(Error::Resolution(format!("σ_{} = {} is below 4h = {}", j, sigma, 4.0 * h)));
    }
    let kind = if sigma >= target.max_smoothing() {
        ApproxKind::Cap
    } else if target.id == ExampleId::RadialKCylinder {
        ApproxKind::Ramp
    } else {
        ApproxKind::Mollified
    };
    Ok(Approximant { target: *target, j, sigma, kind })
}

/// Samples members `js` of the approximating sequence on `domain`.
pub fn mollified_sequence(
    target: &ExampleField,
    domain: &DiscreteDomain,
    sigma0: f64,
    js: &[u32],
) -> Result<Vec<ScalarField>> {
    js.iter().map(|&j| mollified(target, j, sigma0, domain.h()).map(|a| a.sample(domain))).collect()
}

// ---------------------------------------------------------------------------
// Excision studies

/// One row of an excision study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub delta: f64,
    /// ∫|∇u|^p over Ω∖B_δ.
    pub grad_p: f64,
    /// ∫|D²u|² over Ω∖B_δ.
    pub hess_sq: f64,
    #[serde(rename = "W0")]
    pub w0: f64,
    /// max |∇u_FD − ∇u| and |D²u_FD − D²u| over interior nodes whose
    /// stencils stay inside the unglued region.
    pub grad_error: f64,
    pub hess_error: f64,
}

/// Polar domain for an example with an optional excision.
pub fn example_domain(field: &ExampleField, h: f64, n_theta: usize, excision: Excision) -> Result<DiscreteDomain> {
    DomainSpec::new(field.shape(), h).polar(Some(n_theta)).excise(excision).build()
}

/// For each δ: finite-difference integrals of |∇u|^p, |D²u|² and W0 on the
/// example's polar domain with the singular set excised to width δ.
pub fn divergence_diagnostics(
    field: &ExampleField,
    h: f64,
    n_theta: usize,
    deltas: &[f64],
    p: f64,
) -> Result<Vec<DivergenceRow>> {
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("δ-schedule must be strictly decreasing".into()));
    }
    if let Some(&d) = deltas.iter().find(|&&d| d < 4.0 * h) {
        return Err(Error::Resolution(format!("δ = {} is below 4h = {}", d, 4.0 * h)));
    }
    deltas
        .iter()
        .map(|&delta| {
            let domain = example_domain(field, h, n_theta, field.excision(delta))?;
            let exact = build_example(field, &domain)?;
            let b = geometry_bundle(&exact.u, &domain)?;
            let grad_p = domain.integrate_with(|k| {
                let g = b.gradient.get(k);
                g[0].hypot(g[1]).powf(p)
            });
            let hess_sq = domain.integrate(&b.hessian.frobenius_sq());
            let w0 = willmore_w0(&domain, &b);
            let (mut ge, mut he) = (0.0f64, 0.0f64);
            let reach = 3.0 * domain.h();
            for k in 0..domain.len() {
                let r = domain.position(k)[0].hypot(domain.position(k)[1]);
                let (lo, hi) = field.pure_region();
                if domain.class(k) != crate::grid::NodeClass::Interior || r < lo + reach || r > hi - reach {
                    continue;
                }
                let (g, ga) = (b.gradient.get(k), exact.gradient.get(k));
                let (hs, ha) = (b.hessian.get(k), exact.hessian.get(k));
                ge = ge.max((g[0] - ga[0]).abs()).max((g[1] - ga[1]).abs());
                for i in 0..2 {
                    for j in 0..2 {
                        he = he.max((hs[i][j] - ha[i][j]).abs());
                    }
                }
            }
            Ok(DivergenceRow { delta, grad_p, hess_sq, w0, grad_error: ge, hess_error: he })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_has_unit_mass() {
        let (x, w) = gauss_legendre(8);
        let m: f64 = x.iter().zip(&w).map(|(&x, w)| w * kernel(x)[0]).sum();
        assert!((m - 1.0).abs() < 1e-14);
    }

    #[test]
    fn profile_derivatives_match_difference_quotients() {
        let e = 1e-6;
        let check = |f: &dyn Fn(f64) -> [f64; 3], r: f64| {
            let (a, b) = (f(r + e), f(r - e));
            let p = f(r);
            assert!((p[1] - (a[0] - b[0]) / (2.0 * e)).abs() < 1e-6 * (1.0 + p[1].abs()), "r={}", r);
            assert!((p[2] - (a[1] - b[1]) / (2.0 * e)).abs() < 1e-5 * (1.0 + p[2].abs()), "r={}", r);
        };
        for r in [0.1, 0.3, 0.6, 0.7] {
            check(&|r| glued(r, loglog), r);
            check(&|r| glued(r, sqrtlog), r);
        }
        for r in [0.3, 0.6, 0.8, 0.95, 1.1, 1.3, 1.45, 1.7] {
            check(&|r| radial_profile(r, 3), r);
            check(&|r| radial_profile(r, 5), r);
        }
        for r in [0.5, 0.9, 0.972, 0.98, 0.99, 1.0, 1.01, 1.03, 1.2] {
            check(&|r| ramp_profile(r, 0.05, 3, 1.0), r);
        }
    }

    #[test]
    fn ramp_profile_is_continuous_at_window_ends() {
        let (s, k, j) = (0.1, 3, 1.0);
        let ak = RAMP_WINDOW.powi(3);
        for r in [1.0 + ak, 1.0 - ak - s] {
            let a = ramp_profile(r - 1e-12, s, k, j);
            let b = ramp_profile(r + 1e-12, s, k, j);
            assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-7, "{:?} {:?}", a, b);
        }
    }
}
