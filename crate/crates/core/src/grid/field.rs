//! Nodal fields on a [`DiscreteDomain`](super::DiscreteDomain).

use crate::{Error, Result};

/// One real value per active node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn zeros(n: usize) -> Self {
        ScalarField { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.len(), other.len());
        ScalarField::new(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map(|v| s * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Errors on the first NaN or infinite value.
    pub fn check_finite(&self, what: &str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::Numerical(format!("{} is not finite at node {}", what, k))),
        }
    }
}

/// An ℝ²-valued nodal field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        VectorField { x, y }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn get(&self, k: usize) -> [f64; 2] {
        [self.x[k], self.y[k]]
    }

    pub fn norm(&self) -> ScalarField {
        ScalarField::new(self.x.iter().zip(&self.y).map(|(a, b)| a.hypot(*b)).collect())
    }

    pub fn max_norm(&self) -> f64 {
        self.x.iter().zip(&self.y).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}

/// A symmetric 2×2-valued nodal field stored as `(xx, xy, yy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    xx: Vec<f64>,
    xy: Vec<f64>,
    yy: Vec<f64>,
}

impl TensorField {
    pub fn new(xx: Vec<f64>, xy: Vec<f64>, yy: Vec<f64>) -> Self {
        assert!(xx.len() == xy.len() && xy.len() == yy.len());
        TensorField { xx, xy, yy }
    }

    pub fn len(&self) -> usize {
        self.xx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xx.is_empty()
    }

    pub fn xx(&self) -> &[f64] {
        &self.xx
    }

    pub fn xy(&self) -> &[f64] {
        &self.xy
    }

    pub fn yy(&self) -> &[f64] {
        &self.yy
    }

    /// `[[xx, xy], [xy, yy]]` at node `k`.
    pub fn get(&self, k: usize) -> [[f64; 2]; 2] {
        [[self.xx[k], self.xy[k]], [self.xy[k], self.yy[k]]]
    }

    /// Squared Frobenius norm `xx² + 2xy² + yy²` per node.
    pub fn frobenius_sq(&self) -> ScalarField {
        ScalarField::new(
            (0..self.len()).map(|k| self.xx[k].powi(2) + 2.0 * self.xy[k].powi(2) + self.yy[k].powi(2)).collect(),
        )
    }

    pub fn det(&self) -> ScalarField {
        ScalarField::new((0..self.len()).map(|k| self.det_at(k)).collect())
    }

    pub fn det_at(&self, k: usize) -> f64 {
        self.xx[k] * self.yy[k] - self.xy[k] * self.xy[k]
    }
}
