//! Compressed row storage for linear stencil operators.

use smallvec::SmallVec;

/// A linear combination of nodal values, `Σ w_k u[k]`.
pub type Stencil = SmallVec<[(u32, f64); 24]>;

/// Adds `scale * src` into `dst`.
pub(crate) fn axpy(dst: &mut Stencil, scale: f64, src: &[(u32, f64)]) {
    if scale == 0.0 {
        return;
    }
    for &(k, w) in src {
        dst.push((k, scale * w));
    }
}

/// Sorts by node index, merges duplicates and drops exact zeros.
pub(crate) fn compress(s: &mut Stencil) {
    s.sort_by_key(|e| e.0);
    let mut out: Stencil = SmallVec::new();
    for &(k, w) in s.iter() {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += w,
            _ => out.push((k, w)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    *s = out;
}

/// Row-compressed sparse matrix; row `i` holds the stencil of node or face `i`.
#[derive(Debug, Clone)]
pub struct SparseOp {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Default for SparseOp {
    fn default() -> Self {
        Self::new()
    }
}

impl SparseOp {
    pub fn new() -> Self {
        SparseOp { row_ptr: vec![0], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn push_row(&mut self, row: &[(u32, f64)]) {
        for &(k, w) in row {
            self.cols.push(k);
            self.vals.push(w);
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().zip(&self.vals[a..b]).map(|(&c, &v)| (c as usize, v))
    }

    pub fn row_dot(&self, i: usize, u: &[f64]) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        let mut s = 0.0;
        for p in a..b {
            s += self.vals[p] * u[self.cols[p] as usize];
        }
        s
    }

    /// `Σ w_k (u_k − base)`; equals `row_dot` for rows that annihilate
    /// constants and is bitwise invariant under exact shifts of `u`.
    pub fn row_dot_rel(&self, i: usize, u: &[f64], base: f64) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        let mut s = 0.0;
        for p in a..b {
            s += self.vals[p] * (u[self.cols[p] as usize] - base);
        }
        s
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum()
    }

    /// Row `i` applied relative to `u[i]` (node-indexed difference operators).
    pub fn apply_rel(&self, u: &[f64]) -> Vec<f64> {
        (0..self.rows()).map(|i| self.row_dot_rel(i, u, u[i])).collect()
    }

    /// Adjoint of `apply_rel`: `out += Jᵀ y`.
    pub fn apply_rel_transpose_add(&self, y: &[f64], out: &mut [f64]) {
        for (i, &yi) in y.iter().enumerate().take(self.rows()) {
            if yi == 0.0 {
                continue;
            }
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut sum = 0.0;
            for p in a..b {
                out[self.cols[p] as usize] += self.vals[p] * yi;
                sum += self.vals[p];
            }
            out[i] -= sum * yi;
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.rows()).map(|i| self.row_dot(i, u)).collect()
    }

    /// `out += Aᵀ y`.
    pub fn apply_transpose_add(&self, y: &[f64], out: &mut [f64]) {
        for (i, &yi) in y.iter().enumerate().take(self.rows()) {
            if yi == 0.0 {
                continue;
            }
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for p in a..b {
                out[self.cols[p] as usize] += self.vals[p] * yi;
            }
        }
    }

    pub(crate) fn row_stencil(&self, i: usize) -> Stencil {
        self.row(i).map(|(c, v)| (c as u32, v)).collect()
    }
}
