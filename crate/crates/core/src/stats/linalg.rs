//! Small dense linear algebra: row-major matrices, Householder QR,
//! Cholesky and friends. Sized for design matrices of a few hundred rows and
//! a few dozen columns.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid("columns differ in length"));
        }
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: idx.len(), cols: self.cols, data }
    }

    /// Principal submatrix / column subset.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                m[(i, jj)] = self[(i, j)];
            }
        }
        m
    }

    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self[(i, j)];
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::invalid("matrix dimensions do not agree"));
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    m[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(m)
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Cross-product `Aᵀ A`.
    pub fn gram(&self) -> Self {
        let mut g = Self::zeros(self.cols, self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..self.cols {
                let a = row[i];
                for j in i..self.cols {
                    g[(i, j)] += a * row[j];
                }
            }
        }
        for i in 0..self.cols {
            for j in 0..i {
                g[(i, j)] = g[(j, i)];
            }
        }
        g
    }

    pub fn add_diagonal(&mut self, v: T) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += v;
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Relative tolerance below which a pivot counts as zero.
pub(crate) fn rank_tolerance<T: Real>(dim: usize) -> T {
    T::epsilon() * T::from_usize_lossy(dim.max(1)) * T::lit(100.0)
}

/// Householder QR of an `n x p` matrix (`n >= p`), keeping `R` and the
/// reflectors so `Qᵀ` can be applied to right-hand sides.
#[derive(Debug, Clone)]
pub struct Qr<T> {
    /// Upper triangle holds R; below-diagonal parts hold reflector tails.
    packed: Matrix<T>,
    /// Leading reflector entries.
    heads: Vec<T>,
    /// Reflector scaling `2 / vᵀv` (0 for an identity reflector).
    betas: Vec<T>,
}

/// Outcome of a rank-checked decomposition.
pub enum QrOutcome<T> {
    Full(Qr<T>),
    /// Column `column` is (numerically) a combination of `depends_on`.
    Deficient { column: usize, depends_on: Vec<usize> },
}

impl<T: Real> Qr<T> {
    pub fn decompose(a: &Matrix<T>) -> Result<QrOutcome<T>> {
        let (n, p) = (a.rows(), a.cols());
        if n < p {
            return Err(Error::invalid(format!("QR needs rows >= columns, got {n} x {p}")));
        }
        let col_norms: Vec<T> = (0..p).map(|j| (0..n).map(|i| a[(i, j)] * a[(i, j)]).sum::<T>().sqrt()).collect();
        let tol = rank_tolerance::<T>(n.max(p));
        let mut m = a.clone();
        let mut heads = vec![T::zero(); p];
        let mut betas = vec![T::zero(); p];
        for j in 0..p {
            let norm = (j..n).map(|i| m[(i, j)] * m[(i, j)]).sum::<T>().sqrt();
            if norm <= tol * col_norms[j] || col_norms[j] == T::zero() {
                let depends_on = Self::dependencies(&m, j, &col_norms);
                return Ok(QrOutcome::Deficient { column: j, depends_on });
            }
            let x0 = m[(j, j)];
            let alpha = if x0 >= T::zero() { -norm } else { norm };
            let v0 = x0 - alpha;
            let vtv = v0 * v0 + ((j + 1)..n).map(|i| m[(i, j)] * m[(i, j)]).sum::<T>();
            let beta = if vtv > T::zero() { T::lit(2.0) / vtv } else { T::zero() };
            // apply to trailing columns
            for k in (j + 1)..p {
                let mut s = v0 * m[(j, k)];
                for i in (j + 1)..n {
                    s += m[(i, j)] * m[(i, k)];
                }
                let s = s * beta;
                m[(j, k)] -= s * v0;
                for i in (j + 1)..n {
                    let vi = m[(i, j)];
                    m[(i, k)] -= s * vi;
                }
            }
            m[(j, j)] = alpha;
            heads[j] = v0;
            betas[j] = beta;
        }
        Ok(QrOutcome::Full(Qr { packed: m, heads, betas }))
    }

    /// Columns before `j` that a deficient column `j` leans on, found by
    /// back-substituting its rotated entries against R.
    fn dependencies(m: &Matrix<T>, j: usize, col_norms: &[T]) -> Vec<usize> {
        if col_norms[j] == T::zero() {
            return Vec::new();
        }
        let mut coef = vec![T::zero(); j];
        for i in (0..j).rev() {
            let mut s = m[(i, j)];
            for k in (i + 1)..j {
                s -= m[(i, k)] * coef[k];
            }
            coef[i] = s / m[(i, i)];
        }
        let tol = T::lit(1e-6);
        (0..j).filter(|&k| (coef[k] * col_norms[k]).abs() > tol * col_norms[j]).collect()
    }

    pub fn cols(&self) -> usize {
        self.heads.len()
    }

    /// Applies `Qᵀ` to `y` in place.
    pub fn apply_qt(&self, y: &mut [T]) {
        let n = self.packed.rows();
        for j in 0..self.cols() {
            let beta = self.betas[j];
            if beta == T::zero() {
                continue;
            }
            let mut s = self.heads[j] * y[j];
            for i in (j + 1)..n {
                s += self.packed[(i, j)] * y[i];
            }
            let s = s * beta;
            y[j] -= s * self.heads[j];
            for i in (j + 1)..n {
                y[i] -= s * self.packed[(i, j)];
            }
        }
    }

    /// Solves `R x = b` for the leading `p` entries of `b`.
    pub fn solve_r(&self, b: &[T]) -> Vec<T> {
        let p = self.cols();
        let mut x = vec![T::zero(); p];
        for i in (0..p).rev() {
            let mut s = b[i];
            for k in (i + 1)..p {
                s -= self.packed[(i, k)] * x[k];
            }
            x[i] = s / self.packed[(i, i)];
        }
        x
    }

    pub fn r_diagonal(&self) -> Vec<T> {
        (0..self.cols()).map(|i| self.packed[(i, i)]).collect()
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Real> Cholesky<T> {
    /// `None` when the matrix is not numerically positive definite.
    pub fn new(a: &Matrix<T>) -> Option<Self> {
        let n = a.rows();
        if a.cols() != n {
            return None;
        }
        let scale = (0..n).map(|i| a[(i, i)].abs()).fold(T::zero(), T::max);
        let tol = rank_tolerance::<T>(n) * scale;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > tol) {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(Self { l })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.rows();
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.l.rows();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }

    pub fn ln_det(&self) -> T {
        let n = self.l.rows();
        T::lit(2.0) * (0..n).map(|i| self.l[(i, i)].ln()).sum::<T>()
    }
}
