//! Dense row-major matrices and rank-3 tensors in double precision.

use crate::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "matrix data length {} != {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `out = self * x`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            *o = acc;
        }
    }

    /// `out += self^T * x` (accumulates).
    pub fn matvec_t_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * xi;
            }
        }
    }

    /// Rank-one update `self += scale * a * b^T`.
    pub fn add_outer(&mut self, a: &[f64], b: &[f64], scale: f64) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        for (i, &ai) in a.iter().enumerate() {
            let s = scale * ai;
            if s == 0.0 {
                continue;
            }
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (w, &bj) in row.iter_mut().zip(b) {
                *w += s * bj;
            }
        }
    }

    /// `self * self^T`-style product with another matrix: returns `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Row-major `n x t x d` tensor: `n` sequences of length `t` with `d` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    t: usize,
    d: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize, t: usize, d: usize) -> Self {
        Tensor3 {
            n,
            t,
            d,
            data: vec![0.0; n * t * d],
        }
    }

    pub fn from_vec(n: usize, t: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * t * d {
            return Err(Error::ShapeMismatch(format!(
                "tensor data length {} != {n}x{t}x{d}",
                data.len()
            )));
        }
        Ok(Tensor3 { n, t, d, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n, self.t, self.d)
    }

    #[inline]
    pub fn get(&self, i: usize, t: usize, j: usize) -> f64 {
        self.data[(i * self.t + t) * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, t: usize, j: usize, v: f64) {
        self.data[(i * self.t + t) * self.d + j] = v;
    }

    /// Flattened `t*d` view of sequence `i`.
    #[inline]
    pub fn example(&self, i: usize) -> &[f64] {
        &self.data[i * self.t * self.d..(i + 1) * self.t * self.d]
    }

    #[inline]
    pub fn example_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.t * self.d..(i + 1) * self.t * self.d]
    }

    /// `d`-channel slice at step `t` of sequence `i`.
    #[inline]
    pub fn step(&self, i: usize, t: usize) -> &[f64] {
        let base = (i * self.t + t) * self.d;
        &self.data[base..base + self.d]
    }

    #[inline]
    pub fn step_mut(&mut self, i: usize, t: usize) -> &mut [f64] {
        let base = (i * self.t + t) * self.d;
        &mut self.data[base..base + self.d]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Gathers the given sequences into a new tensor, preserving order.
    pub fn select(&self, indices: &[usize]) -> Tensor3 {
        let mut out = Tensor3::zeros(indices.len(), self.t, self.d);
        for (k, &i) in indices.iter().enumerate() {
            out.example_mut(k).copy_from_slice(self.example(i));
        }
        out
    }
}
