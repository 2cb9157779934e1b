//! Dense row-major linear algebra used throughout the crate.
//!
//! Everything here works on small-to-moderate dense matrices. The symmetric
//! eigensolver is cyclic Jacobi up to [`JACOBI_MAX_ORDER`]; larger problems
//! (classical MDS of a few thousand objects) go through nalgebra's
//! Householder/QL routine.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{JofcError, Result};

/// Largest order handled by the in-crate Jacobi eigensolver.
pub const JACOBI_MAX_ORDER: usize = 128;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-12;

/// Dense matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries. All entries must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(JofcError::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(JofcError::NonFinite(format!(
                "entry ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// The all-ones matrix `J`.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![1.0; rows * cols],
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(JofcError::Shape("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Copy of rows `start..start + count`.
    pub fn row_block(&self, start: usize, count: usize) -> DenseMatrix {
        DenseMatrix {
            rows: count,
            cols: self.cols,
            data: self.data[start * self.cols..(start + count) * self.cols].to_vec(),
        }
    }

    /// Copy of the `rows x cols` submatrix starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(JofcError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(JofcError::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entrywise difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (m, v) in means.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        if self.rows > 0 {
            means.iter_mut().for_each(|m| *m /= self.rows as f64);
        }
        means
    }

    /// Subtracts the column means in place.
    pub fn center_columns(&mut self) {
        let means = self.column_means();
        for i in 0..self.rows {
            for (v, m) in self.row_mut(i).iter_mut().zip(&means) {
                *v -= m;
            }
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        DenseMatrix::from_fn(r, c, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<DenseMatrix> {
        if !self.is_square() {
            return Err(JofcError::Shape(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = DenseMatrix::identity(n);
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs()))
                .unwrap_or(col);
            let p = a[(pivot, col)];
            if p.abs() <= f64::EPSILON * scale * n as f64 || p == 0.0 {
                return Err(JofcError::Singular(format!(
                    "zero pivot in column {col} of a {n}x{n} matrix"
                )));
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p_inv = 1.0 / p;
            a.row_mut(col).iter_mut().for_each(|v| *v *= p_inv);
            inv.row_mut(col).iter_mut().for_each(|v| *v *= p_inv);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.data[r * n + j] -= f * a.data[col * n + j];
                    inv.data[r * n + j] -= f * inv.data[col * n + j];
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric, hollow, nonnegative matrix of pairwise dissimilarities.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarityMatrix(DenseMatrix);

impl DissimilarityMatrix {
    /// Tolerance on `|a_ij - a_ji|` and on the diagonal.
    pub const SYMMETRY_TOL: f64 = 1e-9;

    /// Validates and symmetrizes (by averaging) a dissimilarity matrix.
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(JofcError::Shape(format!(
                "dissimilarity matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let mut out = m;
        for i in 0..n {
            if out[(i, i)].abs() > Self::SYMMETRY_TOL {
                return Err(JofcError::InvalidInput(format!(
                    "diagonal entry ({i}, {i}) = {} is not zero",
                    out[(i, i)]
                )));
            }
            out[(i, i)] = 0.0;
            for j in 0..i {
                let (a, b) = (out[(i, j)], out[(j, i)]);
                if a < 0.0 || b < 0.0 {
                    let (r, c) = if a < 0.0 { (i, j) } else { (j, i) };
                    return Err(JofcError::InvalidInput(format!(
                        "negative dissimilarity {} at ({r}, {c})",
                        out[(r, c)]
                    )));
                }
                if (a - b).abs() > Self::SYMMETRY_TOL {
                    return Err(JofcError::InvalidInput(format!(
                        "asymmetric entries ({i}, {j}) = {a} and ({j}, {i}) = {b}"
                    )));
                }
                let avg = 0.5 * (a + b);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        Ok(Self(out))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DenseMatrix::zeros(n, n))
    }

    /// Number of objects.
    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }
}

/// Pairwise Euclidean distances between the rows of `x`.
pub fn euclidean_distance_matrix(x: &DenseMatrix) -> DissimilarityMatrix {
    let n = x.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let xi = x.row(i);
        for j in 0..i {
            let d = row_distance(xi, x.row(j));
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    DissimilarityMatrix(out)
}

#[inline]
pub(crate) fn row_distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// `-1/2 (I - J/n) M (I - J/n)`.
pub fn double_center(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(JofcError::Shape(format!(
            "double centering needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(m.clone());
    }
    let row_means: Vec<f64> = m.row_sums().into_iter().map(|s| s / n as f64).collect();
    let col_means = m.column_means();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        -0.5 * (m[(i, j)] - row_means[i] - col_means[j] + grand)
    }))
}

/// Eigenvalue with its unit-norm eigenvector.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Full eigendecomposition of a symmetric matrix, sorted by descending
/// eigenvalue. Each vector has its largest-magnitude component positive.
pub fn symmetric_eigen(s: &DenseMatrix) -> Result<Vec<EigenPair>> {
    if !s.is_square() {
        return Err(JofcError::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let mut pairs = if s.rows() <= JACOBI_MAX_ORDER {
        jacobi_eigen(s)?
    } else {
        householder_eigen(s)?
    };
    pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
    pairs.iter_mut().for_each(|p| fix_sign(&mut p.vector));
    Ok(pairs)
}

/// The `k` algebraically largest eigenpairs of a symmetric matrix.
pub fn symmetric_top_eigenpairs(s: &DenseMatrix, k: usize) -> Result<Vec<EigenPair>> {
    if k == 0 || k > s.rows() {
        return Err(JofcError::InvalidInput(format!(
            "requested {k} eigenpairs of a {}x{} matrix",
            s.rows(),
            s.cols()
        )));
    }
    let mut pairs = symmetric_eigen(s)?;
    pairs.truncate(k);
    Ok(pairs)
}

fn fix_sign(v: &mut [f64]) {
    let lead = v
        .iter()
        .copied()
        .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Cyclic Jacobi rotations. Returns unsorted eigenpairs.
pub fn jacobi_eigen(s: &DenseMatrix) -> Result<Vec<EigenPair>> {
    let n = s.rows();
    let mut a = s.clone();
    let mut v = DenseMatrix::identity(n);
    let norm = s.frobenius_norm();
    let target = JACOBI_TOL * norm;
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > target {
        return Err(JofcError::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }
    Ok((0..n)
        .map(|i| EigenPair {
            value: a[(i, i)],
            vector: (0..n).map(|k| v[(k, i)]).collect(),
        })
        .collect())
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for (j, x) in a.row(i).iter().enumerate() {
            if i != j {
                sum += x * x;
            }
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn householder_eigen(s: &DenseMatrix) -> Result<Vec<EigenPair>> {
    let n = s.rows();
    let m = nalgebra::DMatrix::from_row_slice(n, n, s.as_slice());
    let eig = m
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(JofcError::NoConvergence { sweeps: 0 })?;
    Ok((0..n)
        .map(|i| EigenPair {
            value: eig.eigenvalues[i],
            vector: eig.eigenvectors.column(i).iter().copied().collect(),
        })
        .collect())
}

/// Moore-Penrose pseudoinverse of a symmetric matrix by eigendecomposition.
///
/// Eigenvalues below `1e-10 * max|λ|` are treated as zero.
pub fn pseudoinverse_oracle(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.rows();
    let pairs = symmetric_eigen(m)?;
    let max = pairs.iter().fold(0.0_f64, |acc, p| acc.max(p.value.abs()));
    let cutoff = 1e-10 * max;
    let mut out = DenseMatrix::zeros(n, n);
    for p in pairs.iter().filter(|p| p.value.abs() > cutoff) {
        let inv = 1.0 / p.value;
        for i in 0..n {
            let vi = p.vector[i] * inv;
            if vi == 0.0 {
                continue;
            }
            for (o, vj) in out.row_mut(i).iter_mut().zip(&p.vector) {
                *o += vi * vj;
            }
        }
    }
    Ok(out)
}

/// Thin singular value decomposition `A = U diag(sigma) V^T` of a small
/// matrix with `rows >= cols`, by one-sided Jacobi rotations.
///
/// Singular values are sorted descending. Columns of `U` belonging to zero
/// singular values are completed to an orthonormal set.
pub fn svd_small(a: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    let (r, c) = (a.rows(), a.cols());
    if r < c {
        return Err(JofcError::Shape(format!(
            "one-sided Jacobi SVD needs rows >= cols, got {r}x{c}"
        )));
    }
    let mut w = a.clone();
    let mut v = DenseMatrix::identity(c);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in (p + 1)..c {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..r {
                    alpha += w[(i, p)] * w[(i, p)];
                    beta += w[(i, q)] * w[(i, q)];
                    gamma += w[(i, p)] * w[(i, q)];
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..r {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = cs * x - sn * y;
                    w[(i, q)] = sn * x + cs * y;
                }
                for i in 0..c {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = cs * x - sn * y;
                    v[(i, q)] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = (0..c)
        .map(|j| ((0..r).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>().sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    let top = order.first().map_or(0.0, |o| o.0);
    let mut u = DenseMatrix::zeros(r, c);
    let mut v_sorted = DenseMatrix::zeros(c, c);
    let mut sigma = Vec::with_capacity(c);
    let mut filled = Vec::with_capacity(c);
    for (k, &(s, j)) in order.iter().enumerate() {
        for i in 0..c {
            v_sorted[(i, k)] = v[(i, j)];
        }
        if s > 1e-14 * top && s > 0.0 {
            for i in 0..r {
                u[(i, k)] = w[(i, j)] / s;
            }
            filled.push(k);
            sigma.push(s);
        } else {
            sigma.push(0.0);
        }
    }
    complete_orthonormal_columns(&mut u, &filled);
    Ok((u, sigma, v_sorted))
}

/// Fills the columns of `u` not listed in `filled` with unit vectors
/// orthogonal to every other column (Gram-Schmidt over the standard basis).
fn complete_orthonormal_columns(u: &mut DenseMatrix, filled: &[usize]) {
    let (r, c) = (u.rows(), u.cols());
    let mut basis: Vec<Vec<f64>> = filled
        .iter()
        .map(|&k| (0..r).map(|i| u[(i, k)]).collect())
        .collect();
    let mut candidate = 0;
    for k in (0..c).filter(|k| !filled.contains(k)) {
        while candidate < r {
            let mut e = vec![0.0; r];
            e[candidate] = 1.0;
            candidate += 1;
            for b in &basis {
                let dot: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
                e.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
            let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                e.iter_mut().for_each(|x| *x /= norm);
                for i in 0..r {
                    u[(i, k)] = e[i];
                }
                basis.push(e);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        let a = random_matrix(rng, n, n);
        a.add(&a.transpose()).unwrap().scale(0.5)
    }

    #[test]
    fn distances_on_a_line() {
        let x = DenseMatrix::from_rows(&[vec![0.0], vec![2.0]]).unwrap();
        let d = euclidean_distance_matrix(&x);
        assert_eq!(d.matrix().as_slice(), &[0.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn coincident_points_have_zero_distances() {
        let d = euclidean_distance_matrix(&DenseMatrix::zeros(3, 2));
        assert!(d.matrix().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn distances_match_gram_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_matrix(&mut rng, 5, 2);
        let d = euclidean_distance_matrix(&x);
        let g = x.matmul(&x.transpose()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let sq = (g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)]).max(0.0);
                assert!((d.get(i, j) - sq.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn double_center_kills_constants() {
        let c = double_center(&DenseMatrix::ones(4, 4)).unwrap();
        assert!(c.frobenius_norm() < 1e-15);
    }

    #[test]
    fn double_center_of_two_points() {
        // squared distances of -1 and +1
        let m = DenseMatrix::from_rows(&[vec![0.0, 4.0], vec![4.0, 0.0]]).unwrap();
        let c = double_center(&m).unwrap();
        let expected = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(c.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn double_center_rejects_rectangular() {
        assert!(double_center(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn top_eigenpairs_of_diagonal() {
        let s = DenseMatrix::diag(&[3.0, 1.0, 2.0]);
        let pairs = symmetric_top_eigenpairs(&s, 2).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].value - 3.0).abs() < 1e-14);
        assert!((pairs[1].value - 2.0).abs() < 1e-14);
        assert!((pairs[0].vector[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_spectrum() {
        let pairs = symmetric_top_eigenpairs(&DenseMatrix::identity(4), 1).unwrap();
        assert!((pairs[0].value - 1.0).abs() < 1e-14);
        let norm: f64 = pairs[0].vector.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn top_eigenpairs_rejects_bad_k() {
        let s = DenseMatrix::identity(3);
        assert!(symmetric_top_eigenpairs(&s, 0).is_err());
        assert!(symmetric_top_eigenpairs(&s, 4).is_err());
    }

    fn check_residuals(s: &DenseMatrix, pairs: &[EigenPair]) {
        let tol = 1e-8 * s.frobenius_norm();
        for p in pairs {
            let n = s.rows();
            let mut res = 0.0;
            for i in 0..n {
                let sv: f64 = s.row(i).iter().zip(&p.vector).map(|(a, b)| a * b).sum();
                res += (sv - p.value * p.vector[i]).powi(2);
            }
            assert!(res.sqrt() < tol, "residual {}", res.sqrt());
            let norm: f64 = p.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        for w in pairs.windows(2) {
            assert!(w[0].value >= w[1].value);
        }
    }

    #[test]
    fn random_symmetric_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_symmetric(&mut rng, 6);
        check_residuals(&s, &symmetric_eigen(&s).unwrap());
    }

    #[test]
    fn householder_path_agrees_with_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_symmetric(&mut rng, 40);
        let mut jac = jacobi_eigen(&s).unwrap();
        let mut hh = householder_eigen(&s).unwrap();
        jac.sort_by(|a, b| b.value.total_cmp(&a.value));
        hh.sort_by(|a, b| b.value.total_cmp(&a.value));
        for (a, b) in jac.iter().zip(&hh) {
            assert!((a.value - b.value).abs() < 1e-10);
        }
        let big = random_symmetric(&mut rng, JACOBI_MAX_ORDER + 20);
        check_residuals(&big, &symmetric_eigen(&big).unwrap());
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = random_symmetric(&mut rng, 7);
        for p in symmetric_eigen(&s).unwrap() {
            let lead = p
                .vector
                .iter()
                .copied()
                .fold(0.0_f64, |b, x| if x.abs() > b.abs() { x } else { b });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn pseudoinverse_of_singular_diagonal() {
        let p = pseudoinverse_oracle(&DenseMatrix::diag(&[2.0, 0.0])).unwrap();
        assert!(p.max_abs_diff(&DenseMatrix::diag(&[0.5, 0.0])) < 1e-15);
    }

    fn assert_moore_penrose(m: &DenseMatrix, p: &DenseMatrix, tol: f64) {
        let mpm = m.matmul(p).unwrap().matmul(m).unwrap();
        let pmp = p.matmul(m).unwrap().matmul(p).unwrap();
        let mp = m.matmul(p).unwrap();
        let pm = p.matmul(m).unwrap();
        assert!(mpm.sub(m).unwrap().frobenius_norm() < tol);
        assert!(pmp.sub(p).unwrap().frobenius_norm() < tol);
        assert!(mp.sub(&mp.transpose()).unwrap().frobenius_norm() < tol);
        assert!(pm.sub(&pm.transpose()).unwrap().frobenius_norm() < tol);
    }

    #[test]
    fn pseudoinverse_of_path_laplacian() {
        let l = DenseMatrix::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ])
        .unwrap();
        let p = pseudoinverse_oracle(&l).unwrap();
        assert_moore_penrose(&l, &p, 1e-8 * l.frobenius_norm());
        assert!(p.is_symmetric(1e-10));
    }

    #[test]
    fn inverse_round_trip_and_singular_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 5, 5).add(&DenseMatrix::identity(5).scale(3.0)).unwrap();
        let prod = a.matmul(&a.inverse().unwrap()).unwrap();
        assert!(prod.max_abs_diff(&DenseMatrix::identity(5)) < 1e-12);
        assert!(matches!(
            DenseMatrix::ones(3, 3).inverse(),
            Err(JofcError::Singular(_))
        ));
    }

    #[test]
    fn svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &(r, c) in &[(2, 2), (3, 3), (5, 3)] {
            let a = random_matrix(&mut rng, r, c);
            let (u, s, v) = svd_small(&a).unwrap();
            let back = u
                .matmul(&DenseMatrix::diag(&s))
                .unwrap()
                .matmul(&v.transpose())
                .unwrap();
            assert!(back.max_abs_diff(&a) < 1e-12);
            let utu = u.transpose().matmul(&u).unwrap();
            assert!(utu.max_abs_diff(&DenseMatrix::identity(c)) < 1e-12);
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_of_rank_deficient_matrix() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let (u, s, v) = svd_small(&a).unwrap();
        assert!(s[1].abs() < 1e-12);
        let utu = u.transpose().matmul(&u).unwrap();
        assert!(utu.max_abs_diff(&DenseMatrix::identity(2)) < 1e-12);
        let back = u.matmul(&DenseMatrix::diag(&s)).unwrap().matmul(&v.transpose()).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn dissimilarity_validation() {
        let neg = DenseMatrix::from_rows(&[vec![0.0, -0.1], vec![-0.1, 0.0]]).unwrap();
        assert!(DissimilarityMatrix::new(neg).is_err());
        let asym = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.5, 0.0]]).unwrap();
        assert!(DissimilarityMatrix::new(asym).is_err());
        let near = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0 + 1e-12, 0.0]]).unwrap();
        let d = DissimilarityMatrix::new(near).unwrap();
        assert_eq!(d.get(0, 1), d.get(1, 0));
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![0.0, f64::NAN]),
            Err(JofcError::NonFinite(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn points() -> impl Strategy<Value = DenseMatrix> {
            (2usize..7, 1usize..4).prop_flat_map(|(n, d)| {
                proptest::collection::vec(-10.0f64..10.0, n * d)
                    .prop_map(move |v| DenseMatrix::new(n, d, v).unwrap())
            })
        }

        proptest! {
            #[test]
            fn distances_satisfy_triangle_inequality(x in points()) {
                let d = euclidean_distance_matrix(&x);
                let n = d.n();
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            prop_assert!(d.get(i, k) <= d.get(i, j) + d.get(j, k) + 1e-9);
                        }
                    }
                }
            }

            #[test]
            fn double_center_has_zero_margins(x in points()) {
                let d = euclidean_distance_matrix(&x);
                let c = double_center(d.matrix()).unwrap();
                for s in c.row_sums() {
                    prop_assert!(s.abs() < 1e-10);
                }
                for s in c.column_means() {
                    prop_assert!(s.abs() < 1e-10);
                }
            }

            #[test]
            fn pseudoinverse_is_symmetric(seed in 0u64..1000, n in 2usize..8) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = random_symmetric(&mut rng, n);
                let p = pseudoinverse_oracle(&s).unwrap();
                prop_assert!(p.is_symmetric(1e-10 * (1.0 + p.frobenius_norm())));
            }
        }
    }
}
