//! Small dense linear-algebra kernel.
//!
//! Vectors are plain `f64` slices; [`Matrix`] is column-major. Everything here
//! runs sequentially in a fixed order, so results are bit-reproducible on a
//! given platform.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    // scaled to stay finite for large entries
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = a.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

/// `a - b`, checked.
pub fn sub(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_same_len(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

/// `y += s * x`
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

pub(crate) fn check_same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("{} vs {}", a.len(), b.len())));
    }
    Ok(())
}

/// Column-major dense matrix.
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

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// An `rows x 0` matrix, the starting point for column accumulation.
    pub fn empty(rows: usize) -> Self {
        Matrix::zeros(rows, 0)
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            if c.len() != rows {
                return Err(Error::Dimension(format!(
                    "column of length {} in matrix with {rows} rows",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Matrix::from_column_major(rows, columns.len(), data)
    }

    /// Builds from row-major nested data, the natural layout of literals and JSON.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut m = Matrix::zeros(n_rows, n_cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_cols {
                return Err(Error::Dimension("ragged rows".into()));
            }
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        if !all_finite(&m.data) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(m)
    }

    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if !all_finite(&data) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.cols).map(move |j| self.column(j))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)]).collect())
            .collect()
    }

    pub fn insert_column(&mut self, at: usize, col: &[f64]) -> Result<()> {
        if col.len() != self.rows {
            return Err(Error::Dimension(format!(
                "column of length {} in matrix with {} rows",
                col.len(),
                self.rows
            )));
        }
        let start = at * self.rows;
        self.data.splice(start..start, col.iter().copied());
        self.cols += 1;
        Ok(())
    }

    pub fn remove_column(&mut self, at: usize) -> Vec<f64> {
        let start = at * self.rows;
        let removed = self.data.drain(start..start + self.rows).collect();
        self.cols -= 1;
        removed
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.rows];
        for (j, xj) in x.iter().enumerate() {
            axpy(*xj, self.column(j), &mut y);
        }
        Ok(y)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let col = self.mul_vec(other.column(j))?;
            out.column_mut(j).copy_from_slice(&col);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("matrix shapes differ".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[j * self.rows + i]
    }
}

/// Householder QR factorization `A = Q R` of an `m x k` matrix with `m >= k`.
///
/// Reflector `j` is `I - 2 v_j v_j^T` acting on rows `j..m`, with `v_j` of unit
/// length. A column that is already zero below the diagonal gets no reflector.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    rows: usize,
    reflectors: Vec<Option<Vec<f64>>>,
    r: Matrix,
}

impl HouseholderQr {
    pub fn new(a: &Matrix) -> Result<Self> {
        let (m, k) = (a.rows(), a.cols());
        if k == 0 || k > m {
            return Err(Error::Dimension(format!(
                "QR needs m >= k >= 1, got {m}x{k}"
            )));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite("QR input"));
        }
        let mut work = a.clone();
        let mut reflectors = Vec::with_capacity(k);
        for j in 0..k {
            let x = &work.column(j)[j..];
            let alpha = norm2(x);
            if alpha == 0.0 {
                reflectors.push(None);
                continue;
            }
            // choose the sign that avoids cancellation in v[0]
            let beta = if x[0] >= 0.0 { -alpha } else { alpha };
            let mut v = x.to_vec();
            v[0] -= beta;
            let vn = norm2(&v);
            if vn == 0.0 {
                reflectors.push(None);
                continue;
            }
            v.iter_mut().for_each(|e| *e /= vn);
            for c in j..k {
                let col = &mut work.column_mut(c)[j..];
                let s = 2.0 * dot(&v, col);
                axpy(-s, &v, col);
            }
            // exact zeros below the diagonal
            work.column_mut(j)[j] = beta;
            work.column_mut(j)[j + 1..].iter_mut().for_each(|e| *e = 0.0);
            reflectors.push(Some(v));
        }
        let mut r = Matrix::zeros(k, k);
        for j in 0..k {
            for i in 0..=j {
                r[(i, j)] = work[(i, j)];
            }
        }
        Ok(HouseholderQr {
            rows: m,
            reflectors,
            r,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.r.cols()
    }

    /// The `k x k` upper-triangular factor.
    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn r_diagonal(&self) -> Vec<f64> {
        (0..self.cols()).map(|i| self.r[(i, i)]).collect()
    }

    /// `b <- Q^T b`
    pub fn apply_qt(&self, b: &mut [f64]) {
        for (j, v) in self.reflectors.iter().enumerate() {
            if let Some(v) = v {
                let tail = &mut b[j..];
                let s = 2.0 * dot(v, tail);
                axpy(-s, v, tail);
            }
        }
    }

    /// `y <- Q y`
    pub fn apply_q(&self, y: &mut [f64]) {
        for (j, v) in self.reflectors.iter().enumerate().rev() {
            if let Some(v) = v {
                let tail = &mut y[j..];
                let s = 2.0 * dot(v, tail);
                axpy(-s, v, tail);
            }
        }
    }

    /// Forms `Q [R; 0]` explicitly; used to check the factorization.
    pub fn recompose(&self) -> Matrix {
        let (m, k) = (self.rows, self.cols());
        let mut out = Matrix::zeros(m, k);
        for j in 0..k {
            let mut col = vec![0.0; m];
            for i in 0..=j {
                col[i] = self.r[(i, j)];
            }
            self.apply_q(&mut col);
            out.column_mut(j).copy_from_slice(&col);
        }
        out
    }

    /// First column whose diagonal magnitude is at most `rel_tol * max|diag|`.
    pub fn first_deficient_column(&self, rel_tol: f64) -> Option<usize> {
        let diag = self.r_diagonal();
        let max = diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        diag.iter().position(|d| d.abs() <= rel_tol * max)
    }

    /// Least-squares solution of `A x ~ b`. Fails with [`Error::RankDeficient`]
    /// if some `|r_jj| <= rel_tol * max|diag(R)|`.
    pub fn solve_least_squares(&self, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
        if b.len() != self.rows {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        if let Some(column) = self.first_deficient_column(rel_tol) {
            return Err(Error::RankDeficient {
                column,
                diag: self.r[(column, column)],
            });
        }
        let mut qtb = b.to_vec();
        self.apply_qt(&mut qtb);
        Ok(back_substitute(&self.r, &qtb[..self.cols()]))
    }
}

fn back_substitute(r: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let k = r.cols();
    let mut x = rhs.to_vec();
    for i in (0..k).rev() {
        let mut s = x[i];
        for j in i + 1..k {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    x
}

/// Factorizes `a` and returns the least-squares minimizer of `||a x - b||_2`.
///
/// `rank_tol` is the relative threshold on the diagonal of `R` below which the
/// system is reported as rank deficient.
pub fn lstsq(a: &Matrix, b: &[f64], rank_tol: f64) -> Result<Vec<f64>> {
    if !all_finite(b) {
        return Err(Error::NonFinite("least-squares right-hand side"));
    }
    HouseholderQr::new(a)?.solve_least_squares(b, rank_tol)
}
