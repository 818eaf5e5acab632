//! Closed-form fields with exact gradients and Hessians.
//!
//! These serve three roles: smooth test fields, boundary data φ (given on Ω̄
//! so that arclength derivatives follow from the chain rule) and oracles for
//! the finite-difference operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::grid::{DiscreteDomain, ScalarField};

/// A scalar function on the plane with exact first and second derivatives.
pub trait AnalyticField {
    fn value(&self, p: [f64; 2]) -> f64;
    fn gradient(&self, p: [f64; 2]) -> [f64; 2];
    fn hessian(&self, p: [f64; 2]) -> [[f64; 2]; 2];

    /// Nodal samples on a domain.
    fn sample(&self, domain: &DiscreteDomain) -> ScalarField {
        ScalarField::new(domain.positions().iter().map(|&p| self.value(p)).collect())
    }
}

/// One term `amplitude · sin(k·x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierMode {
    pub amplitude: f64,
    pub wavevector: [f64; 2],
    pub phase: f64,
}

impl FourierMode {
    fn eval(&self, p: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let k = self.wavevector;
        let arg = k[0] * p[0] + k[1] * p[1] + self.phase;
        let (s, c) = arg.sin_cos();
        let a = self.amplitude;
        (
            a * s,
            [a * c * k[0], a * c * k[1]],
            [[-a * s * k[0] * k[0], -a * s * k[0] * k[1]], [-a * s * k[0] * k[1], -a * s * k[1] * k[1]]],
        )
    }
}

/// Named analytic families used as test fields and as boundary data.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Analytic {
    Zero,
    Constant { c: f64 },
    /// `a x + b y + c`.
    Affine { a: f64, b: f64, c: f64 },
    /// `c + b·x + ½ xᵀ A x`.
    Quadratic { c: f64, b: [f64; 2], a: [[f64; 2]; 2] },
    /// Upper hemisphere `√(R² − |x − center|²)`.
    SphereCap { center: [f64; 2], radius: f64 },
    /// `amplitude · exp(−|x − center|² / width²)`.
    Gaussian { center: [f64; 2], amplitude: f64, width: f64 },
    /// Sum of Fourier modes.
    Fourier { modes: Vec<FourierMode> },
    /// `amplitude · (1 − ρ²)² · (1 + Σ modes)` with `ρ = |x − center| / radius`,
    /// extended by zero; value and gradient vanish on `ρ = 1`.
    ClampedBump { center: [f64; 2], radius: f64, amplitude: f64, modes: Vec<FourierMode> },
    Sum { terms: Vec<Analytic> },
}

impl Analytic {
    /// Parabolic cylinder `(x¹)²/2`.
    pub fn parabolic_cylinder() -> Self {
        Analytic::Quadratic { c: 0.0, b: [0.0; 2], a: [[1.0, 0.0], [0.0, 0.0]] }
    }

    /// Unit-sphere cap over the origin.
    pub fn unit_sphere_cap() -> Self {
        Analytic::SphereCap { center: [0.0; 2], radius: 1.0 }
    }

    /// Random smooth field with `n_modes` low-frequency modes (|k| ≤ `k_max`).
    pub fn random_fourier(seed: u64, n_modes: usize, k_max: f64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Analytic::Fourier { modes: random_modes(&mut rng, n_modes, k_max, amplitude) }
    }

    /// Random clamped bump on a disk: zero value and zero normal derivative on its rim.
    pub fn random_clamped_bump(seed: u64, center: [f64; 2], radius: f64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = random_modes(&mut rng, 4, 3.0 / radius, 0.3);
        Analytic::ClampedBump { center, radius, amplitude, modes }
    }

    fn eval(&self, p: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        const Z: [[f64; 2]; 2] = [[0.0; 2]; 2];
        match self {
            Analytic::Zero => (0.0, [0.0; 2], Z),
            Analytic::Constant { c } => (*c, [0.0; 2], Z),
            Analytic::Affine { a, b, c } => (a * p[0] + b * p[1] + c, [*a, *b], Z),
            Analytic::Quadratic { c, b, a } => {
                let ax = [a[0][0] * p[0] + a[0][1] * p[1], a[1][0] * p[0] + a[1][1] * p[1]];
                let v = c + b[0] * p[0] + b[1] * p[1] + 0.5 * (p[0] * ax[0] + p[1] * ax[1]);
                let sym = 0.5 * (a[0][1] + a[1][0]);
                (
                    v,
                    [b[0] + a[0][0] * p[0] + sym * p[1], b[1] + sym * p[0] + a[1][1] * p[1]],
                    [[a[0][0], sym], [sym, a[1][1]]],
                )
            }
            Analytic::SphereCap { center, radius } => {
                let x = [p[0] - center[0], p[1] - center[1]];
                let u = (radius * radius - x[0] * x[0] - x[1] * x[1]).sqrt();
                let g = [-x[0] / u, -x[1] / u];
                let u3 = u * u * u;
                let r2 = radius * radius;
                (
                    u,
                    g,
                    [
                        [-(r2 - x[1] * x[1]) / u3, -x[0] * x[1] / u3],
                        [-x[0] * x[1] / u3, -(r2 - x[0] * x[0]) / u3],
                    ],
                )
            }
            Analytic::Gaussian { center, amplitude, width } => {
                let x = [p[0] - center[0], p[1] - center[1]];
                let w2 = width * width;
                let e = amplitude * (-(x[0] * x[0] + x[1] * x[1]) / w2).exp();
                let g = [-2.0 * x[0] / w2 * e, -2.0 * x[1] / w2 * e];
                let hxx = e * (4.0 * x[0] * x[0] / (w2 * w2) - 2.0 / w2);
                let hyy = e * (4.0 * x[1] * x[1] / (w2 * w2) - 2.0 / w2);
                let hxy = e * 4.0 * x[0] * x[1] / (w2 * w2);
                (e, g, [[hxx, hxy], [hxy, hyy]])
            }
            Analytic::Fourier { modes } => sum_modes(modes, p),
            Analytic::ClampedBump { center, radius, amplitude, modes } => {
                let x = [p[0] - center[0], p[1] - center[1]];
                let r2 = radius * radius;
                let s = 1.0 - (x[0] * x[0] + x[1] * x[1]) / r2;
                if s <= 0.0 {
                    return (0.0, [0.0; 2], Z);
                }
                let b = s * s;
                let gb = [-4.0 * s * x[0] / r2, -4.0 * s * x[1] / r2];
                let hb = [
                    [-4.0 * s / r2 + 8.0 * x[0] * x[0] / (r2 * r2), 8.0 * x[0] * x[1] / (r2 * r2)],
                    [8.0 * x[0] * x[1] / (r2 * r2), -4.0 * s / r2 + 8.0 * x[1] * x[1] / (r2 * r2)],
                ];
                let (m, gm, hm) = sum_modes(modes, p);
                let f = 1.0 + m;
                let a = *amplitude;
                let mut hess = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        hess[i][j] = a * (hb[i][j] * f + gb[i] * gm[j] + gb[j] * gm[i] + b * hm[i][j]);
                    }
                }
                (a * b * f, [a * (gb[0] * f + b * gm[0]), a * (gb[1] * f + b * gm[1])], hess)
            }
            Analytic::Sum { terms } => {
                let mut acc = (0.0, [0.0; 2], Z);
                for t in terms {
                    let (v, g, hh) = t.eval(p);
                    acc.0 += v;
                    for i in 0..2 {
                        acc.1[i] += g[i];
                        for j in 0..2 {
                            acc.2[i][j] += hh[i][j];
                        }
                    }
                }
                acc
            }
        }
    }
}

fn random_modes(rng: &mut ChaCha8Rng, n: usize, k_max: f64, amplitude: f64) -> Vec<FourierMode> {
    (0..n)
        .map(|_| {
            let kr = k_max * rng.random::<f64>();
            let ka = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            FourierMode {
                amplitude: amplitude * (rng.random::<f64>() - 0.5) * 2.0 / (n as f64).sqrt(),
                wavevector: [kr * ka.cos(), kr * ka.sin()],
                phase: 2.0 * std::f64::consts::PI * rng.random::<f64>(),
            }
        })
        .collect()
}

fn sum_modes(modes: &[FourierMode], p: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let mut acc = (0.0, [0.0; 2], [[0.0; 2]; 2]);
    for m in modes {
        let (v, g, hh) = m.eval(p);
        acc.0 += v;
        for i in 0..2 {
            acc.1[i] += g[i];
            for j in 0..2 {
                acc.2[i][j] += hh[i][j];
            }
        }
    }
    acc
}

impl AnalyticField for Analytic {
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

/// C² quintic smoothstep `6t⁵ − 15t⁴ + 10t³` clamped to `[0, 1]`, with its
/// first two derivatives.
pub fn smootherstep(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let t2 = t * t;
        (t2 * t * (10.0 - 15.0 * t + 6.0 * t2), 30.0 * t2 * (1.0 - t) * (1.0 - t), 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t))
    }
}
