//! Dense matrix storage and the few linear-algebra kernels the crate needs.
//!
//! `Mat` is row-major (one row per observation). Solver-facing code extracts
//! column-major `ColMat` blocks so coordinate sweeps touch contiguous memory.

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "storage length must be rows*cols");
        Mat { rows, cols, data }
    }

    /// Builds a matrix from row slices.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
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

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| dot(row, x))
            .collect()
    }

    /// Symmetric Gram of a column subset restricted to a row subset:
    /// G[a][b] = sum over rows r of X[r, cols[a]] * X[r, cols[b]].
    pub fn gram(&self, row_idx: &[usize], col_idx: &[usize]) -> Mat {
        let k = col_idx.len();
        let mut g = Mat::zeros(k, k);
        for &r in row_idx {
            let row = self.row(r);
            for a in 0..k {
                let xa = row[col_idx[a]];
                if xa == 0.0 {
                    continue;
                }
                for b in a..k {
                    let v = g.get(a, b) + xa * row[col_idx[b]];
                    g.set(a, b, v);
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                let v = g.get(b, a);
                g.set(a, b, v);
            }
        }
        g
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }
}

/// Column-major block extracted from a `Mat`, used by the solver so that
/// per-coordinate passes read contiguous memory.
#[derive(Debug, Clone)]
pub struct ColMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ColMat { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Copies the given rows of `m` into column-major storage.
    pub fn extract_rows(m: &Mat, row_idx: &[usize]) -> Self {
        let rows = row_idx.len();
        let cols = m.cols();
        let mut data = vec![0.0; rows * cols];
        for (out_r, &r) in row_idx.iter().enumerate() {
            let src = m.row(r);
            for j in 0..cols {
                data[j * rows + out_r] = src[j];
            }
        }
        ColMat { rows, cols, data }
    }

    /// Column-major view of the whole matrix.
    pub fn from_mat(m: &Mat) -> Self {
        let idx: Vec<usize> = (0..m.rows()).collect();
        Self::extract_rows(m, &idx)
    }

    pub fn from_cols(rows: usize, cols: Vec<Vec<f64>>) -> Self {
        let c = cols.len();
        let mut data = Vec::with_capacity(rows * c);
        for col in &cols {
            assert_eq!(col.len(), rows, "ragged columns");
            data.extend_from_slice(col);
        }
        ColMat { rows, cols: c, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    /// y = X beta, skipping zero coefficients.
    pub fn matvec_sparse(&self, beta: &[f64]) -> Vec<f64> {
        assert_eq!(beta.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                let col = self.col(j);
                for (yi, &xi) in y.iter_mut().zip(col) {
                    *yi += b * xi;
                }
            }
        }
        y
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a.iter().zip(b)).map(|(wi, (x, y))| wi * x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max)
}

/// Cholesky factorization of a symmetric positive-definite matrix.
/// Returns the lower factor L with A = L L^T.
pub fn cholesky(a: &Mat) -> Result<Mat> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch("cholesky needs a square matrix".into()));
    }
    let scale = (0..n).map(|i| a.get(i, i).abs()).fold(0.0f64, f64::max).max(1.0);
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 1e-12 * scale {
                    return Err(Error::SingularGram);
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solves A x = b given the Cholesky factor L of A.
pub fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    assert_eq!(b.len(), n);
    // forward: L y = b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    // backward: L^T x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    x
}

/// Dominant eigenpair of a symmetric PSD operator given as a matvec closure.
/// Deterministic start vector; converges on the Rayleigh quotient.
pub fn power_iteration<F>(dim: usize, matvec: F, tol: f64, max_iters: usize) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    assert!(dim >= 1);
    // Fixed pseudo-random start so results do not depend on call context.
    let mut v: Vec<f64> = (0..dim)
        .map(|i| {
            let x = (i as u64).wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64) / ((1u64 << 53) as f64) + 0.5
        })
        .collect();
    let nv = norm2(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }
    let mut lambda = 0.0f64;
    for _ in 0..max_iters {
        let mut w = matvec(&v);
        let nw = norm2(&w);
        if nw <= 1e-300 {
            return (0.0, v);
        }
        for x in w.iter_mut() {
            *x /= nw;
        }
        let new_lambda = dot(&w, &matvec(&w));
        let done = (new_lambda - lambda).abs() <= tol * new_lambda.abs().max(1.0);
        v = w;
        lambda = new_lambda;
        if done {
            break;
        }
    }
    (lambda, v)
}

/// Extremal eigenvalues of a symmetric matrix via two power iterations on
/// shifted PSD operators (Gershgorin shift keeps both problems PSD).
pub fn sym_eig_extremes(a: &Mat, tol: f64, max_iters: usize) -> Result<(f64, f64)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch("eigenvalues need a square matrix".into()));
    }
    if a.max_abs_asymmetry() > 1e-9 * (1.0 + a.data().iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
        return Err(Error::NonSymmetric);
    }
    if n == 1 {
        return Ok((a.get(0, 0), a.get(0, 0)));
    }
    let g = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j).abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    // eigs of (A + gI) lie in [0, 2g]
    let (top, _) = power_iteration(n, |v| {
        let mut w = a.matvec(v);
        for (wi, vi) in w.iter_mut().zip(v) {
            *wi += g * vi;
        }
        w
    }, tol, max_iters);
    let max_eig = top - g;
    // eigs of (gI - A) lie in [0, 2g]; dominant is g - lambda_min
    let (bottom, _) = power_iteration(n, |v| {
        let av = a.matvec(v);
        v.iter().zip(av).map(|(vi, avi)| g * vi - avi).collect()
    }, tol, max_iters);
    let min_eig = g - bottom;
    Ok((min_eig, max_eig))
}
