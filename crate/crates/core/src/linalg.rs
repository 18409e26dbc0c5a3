//! Dense desk-scale linear algebra.
//!
//! Everything here works on small row-major matrices (dimensions up to about
//! a hundred). The kernels are the ones the rest of the crate needs:
//! Householder least squares, Cholesky solves, one-sided Jacobi SVD and
//! orthonormal completion of a set of vectors.

use std::fmt;
use std::ops::{Add, Deref, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative threshold on the diagonal of `R` below which a column is
/// considered dependent.
pub const RANK_TOL: f64 = 1e-10;
/// Relative residual accepted from [`solve_spd`].
pub const SOLVE_TOL: f64 = 1e-12;
/// Orthonormality tolerance for singular vectors.
pub const ORTHO_TOL: f64 = 1e-9;

const MAX_JACOBI_SWEEPS: usize = 80;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry at position {index}")]
    NonFinite { index: usize },
    #[error("matrix is rank deficient (numerical rank {rank} < {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("Jacobi SVD did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// A dense real vector.
///
/// Vectors built from external data are checked for finiteness. A vector of
/// length zero is allowed: it is the value of an empty constraint block.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Vector(entries))
    }

    /// Wraps entries produced by internal arithmetic without re-checking them.
    pub(crate) fn from_vec(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// The `index`-th standard basis vector of `R^dim`.
    pub fn unit(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Vector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * factor).collect())
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + factor * b)
                .collect(),
        )
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }

    pub fn concat(parts: &[&Vector]) -> Vector {
        Vector(parts.iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(LinalgError::DimensionMismatch {
                expected,
                found: self.len(),
            })
        }
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = LinalgError;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Vector::new(entries)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        self.add_scaled(-1.0, rhs)
    }
}

impl Neg for &Vector {
    type Output = Vector;

    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;

    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scale(self)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    // Scaled to avoid overflow on the rare large iterate.
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * a.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

/// A dense row-major matrix. Zero rows or zero columns are allowed.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from rows; `cols` is needed when `rows` is empty.
    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Matrix::new(rows.len(), cols, data)
    }

    pub fn from_columns(columns: &[Vector], rows: usize) -> Result<Self> {
        let cols = columns.len();
        let mut m = Matrix::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            c.check_dim(rows)?;
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        Ok(m)
    }

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

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Matrix::zeros(entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vector(&self, i: usize) -> Vector {
        Vector::from_vec(self.row(i).to_vec())
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector::from_vec((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.cols)?;
        Ok(Vector::from_vec(
            (0..self.rows).map(|i| dot(self.row(i), x)).collect(),
        ))
    }

    /// `selfᵀ * y`.
    pub fn tr_mul_vec(&self, y: &Vector) -> Result<Vector> {
        y.check_dim(self.rows)?;
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            if yi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += a * yi;
                }
            }
        }
        Ok(Vector::from_vec(out))
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Stacks blocks vertically; all blocks must share a column count.
    pub fn vstack(blocks: &[&Matrix]) -> Result<Matrix> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            if b.cols != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    found: b.cols,
                });
            }
            data.extend_from_slice(&b.data);
            rows += b.rows;
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Reinterprets a row-major flattening as a `rows × cols` matrix.
    pub fn from_flat(flat: &Vector, rows: usize, cols: usize) -> Result<Matrix> {
        Matrix::new(rows, cols, flat.as_slice().to_vec())
    }

    /// Row-major flattening.
    pub fn flatten(&self) -> Vector {
        Vector::from_vec(self.data.clone())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} ", self.rows, self.cols)?;
        f.debug_list()
            .entries((0..self.rows).map(|i| self.row(i)))
            .finish()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Minimizes `|A s - b|` for `A` of full column rank, via Householder QR.
pub fn least_squares(a: &Matrix, b: &Vector) -> Result<Vector> {
    b.check_dim(a.rows())?;
    let (m, n) = (a.rows(), a.cols());
    if n == 0 {
        return Ok(Vector::zeros(0));
    }
    if n > m {
        return Err(LinalgError::RankDeficient { rank: m, cols: n });
    }

    let mut r = a.clone();
    let mut qtb = b.clone().into_vec();
    let mut diag = vec![0.0; n];
    for k in 0..n {
        let alpha = norm(&(k..m).map(|i| r[(i, k)]).collect::<Vec<_>>());
        if alpha == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if r[(k, k)] > 0.0 { -alpha } else { alpha };
        // v = x - alpha e_1, stored in place below the diagonal.
        r[(k, k)] -= alpha;
        let vnorm2: f64 = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum();
        if vnorm2 > 0.0 {
            for j in k + 1..n {
                let s: f64 = (k..m).map(|i| r[(i, k)] * r[(i, j)]).sum();
                let f = 2.0 * s / vnorm2;
                for i in k..m {
                    let vi = r[(i, k)];
                    r[(i, j)] -= f * vi;
                }
            }
            let s: f64 = (k..m).map(|i| r[(i, k)] * qtb[i]).sum();
            let f = 2.0 * s / vnorm2;
            for (i, q) in qtb.iter_mut().enumerate().take(m).skip(k) {
                *q -= f * r[(i, k)];
            }
        }
        diag[k] = alpha;
    }

    let largest = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    let rank = diag
        .iter()
        .filter(|d| largest > 0.0 && d.abs() >= RANK_TOL * largest)
        .count();
    if rank < n {
        return Err(LinalgError::RankDeficient { rank, cols: n });
    }

    let mut s = vec![0.0; n];
    for k in (0..n).rev() {
        let tail: f64 = (k + 1..n).map(|j| r[(k, j)] * s[j]).sum();
        s[k] = (qtb[k] - tail) / diag[k];
    }
    Ok(Vector::from_vec(s))
}

/// Solves `S x = b` for symmetric positive definite `S` by Cholesky.
///
/// Only the lower triangle of `S` is read.
pub fn solve_spd(s: &Matrix, b: &Vector) -> Result<Vector> {
    let n = s.rows();
    if s.cols() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: s.cols(),
        });
    }
    b.check_dim(n)?;

    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let pivot = s[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { row: j, pivot });
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let v = s[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = v / d;
        }
    }

    let mut y = vec![0.0; n];
    for i in 0..n {
        let acc: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        y[i] = (b[i] - acc) / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let acc: f64 = (i + 1..n).map(|k| l[(k, i)] * x[k]).sum();
        x[i] = (y[i] - acc) / l[(i, i)];
    }
    Ok(Vector::from_vec(x))
}

/// Thin singular value decomposition `A = U diag(sigma) Vᵀ`.
///
/// For an `m × n` input, `U` is `m × k`, `V` is `n × k` with `k = min(m, n)`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vector,
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for j in 0..us.cols() {
            for i in 0..us.rows() {
                us[(i, j)] *= self.sigma[j];
            }
        }
        us.matmul(&self.v.transpose())
            .expect("svd factors have consistent shapes")
    }
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Singular values come out nonincreasing. Equal singular values keep the
/// column order produced by the Jacobi sweeps, which makes truncation
/// deterministic.
pub fn svd(a: &Matrix) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd(&a.transpose())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = Matrix::identity(n);

    let mut converged = n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(LinalgError::NonConvergence {
            sweeps: MAX_JACOBI_SWEEPS,
        });
    }

    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort: ties keep Jacobi column order.
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let largest = norms.iter().fold(0.0f64, |acc, v| acc.max(*v));
    let mut u_cols: Vec<Vector> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut v_sorted = Matrix::zeros(n, n);
    let mut pending_null = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        sigma.push(norms[j]);
        for i in 0..n {
            v_sorted[(i, k)] = v[(i, j)];
        }
        if norms[j] > 0.0 && norms[j] > largest * f64::EPSILON {
            u_cols.push(w.column(j).scale(1.0 / norms[j]));
        } else {
            pending_null.push(k);
            u_cols.push(Vector::zeros(m));
        }
    }
    if !pending_null.is_empty() {
        let known: Vec<Vector> = u_cols
            .iter()
            .enumerate()
            .filter(|(k, _)| !pending_null.contains(k))
            .map(|(_, c)| c.clone())
            .collect();
        let fill = orthonormal_complement(&known, m);
        for (slot, vec) in pending_null.iter().zip(fill) {
            u_cols[*slot] = vec;
        }
    }
    Ok(Svd {
        u: Matrix::from_columns(&u_cols, m)?,
        sigma: Vector::from_vec(sigma),
        v: v_sorted,
    })
}

/// Orthonormal basis of the span of `vectors`, dropping dependent ones.
pub fn orthonormal_basis(vectors: &[Vector]) -> Vec<Vector> {
    let scale = vectors.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let mut basis: Vec<Vector> = Vec::new();
    for v in vectors {
        if let Some(q) = gram_schmidt_step(&basis, v, RANK_TOL * scale) {
            basis.push(q);
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)` in `R^dim`.
pub fn orthonormal_complement(vectors: &[Vector], dim: usize) -> Vec<Vector> {
    let mut basis = orthonormal_basis(vectors);
    let start = basis.len();
    for i in 0..dim {
        if basis.len() == dim {
            break;
        }
        if let Some(q) = gram_schmidt_step(&basis, &Vector::unit(dim, i), 1e-8) {
            basis.push(q);
        }
    }
    basis.split_off(start)
}

/// Two passes of modified Gram-Schmidt against `basis`; `None` if the
/// remainder is at most `tol` in norm.
fn gram_schmidt_step(basis: &[Vector], v: &Vector, tol: f64) -> Option<Vector> {
    let mut r = v.clone();
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(&r);
            r = r.add_scaled(-c, q);
        }
    }
    let n = r.norm();
    (n > tol && n > 0.0).then(|| r.scale(1.0 / n))
}
