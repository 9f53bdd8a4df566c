//! Dense row-major matrices and the two factorizations the crate relies on:
//! Householder QR with column pivoting (least squares) and one-sided Jacobi
//! SVD (PCA).

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

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
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix data length",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "row length",
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        let width = self.cols.max(1);
        self.data
            .chunks_exact(width)
            .take(if self.cols == 0 { 0 } else { self.rows })
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Gathers the given rows (repeats allowed) into a new matrix.
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

    /// Appends the columns of `other` to the right.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                context: "hstack row count",
                expected: self.rows,
                found: other.rows,
            });
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Matrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Prepends a column of ones.
    pub fn with_intercept(&self) -> Matrix {
        let cols = self.cols + 1;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.push(1.0);
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: self.rows,
            cols,
            data,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matmul inner dimension",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(self.rows_iter().map(|r| dot(r, v)).collect())
    }

    /// Column means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for r in self.rows_iter() {
            for (m, &x) in means.iter_mut().zip(r) {
                *m += x;
            }
        }
        if self.rows > 0 {
            let n = self.rows as f64;
            means.iter_mut().for_each(|m| *m /= n);
        }
        means
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Result of a pivoted-QR least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    /// Numerical rank detected from the diagonal of R.
    pub rank: usize,
}

/// Householder QR with column pivoting, `a P = Q R`, applied to one right-hand side.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// Column-major storage; the upper `rank` rows hold `[R11 R12]`.
    cols: Vec<Vec<f64>>,
    /// `Q^T b`.
    qtb: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    /// Factors `a` while carrying `b` along. Elimination stops at the first
    /// pivot column whose remaining norm is at most `rank_tol * |R[0,0]|`.
    pub fn new(a: &Matrix, b: &[f64], rank_tol: f64) -> Result<Self> {
        let (m, n) = (a.nrows(), a.ncols());
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                context: "least-squares right-hand side",
                expected: m,
                found: b.len(),
            });
        }
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut qtb = b.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut leading = None;
        let mut rank = 0;

        for k in 0..m.min(n) {
            let (pivot, pivot_norm) = (k..n)
                .map(|j| (j, norm(&cols[j][k..])))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let lead = *leading.get_or_insert(pivot_norm);
            if pivot_norm == 0.0 || (k > 0 && pivot_norm <= rank_tol * lead) {
                break;
            }
            cols.swap(k, pivot);
            perm.swap(k, pivot);

            let alpha = if cols[k][k] > 0.0 { -pivot_norm } else { pivot_norm };
            let mut v: Vec<f64> = cols[k][k..].to_vec();
            v[0] -= alpha;
            let v_norm_sq = dot(&v, &v);
            if v_norm_sq > 0.0 {
                for col in cols.iter_mut().skip(k + 1) {
                    let s = 2.0 * dot(&v, &col[k..]) / v_norm_sq;
                    for (c, vi) in col[k..].iter_mut().zip(&v) {
                        *c -= s * vi;
                    }
                }
                let s = 2.0 * dot(&v, &qtb[k..]) / v_norm_sq;
                for (r, vi) in qtb[k..].iter_mut().zip(&v) {
                    *r -= s * vi;
                }
            }
            cols[k][k] = alpha;
            for c in cols[k][k + 1..].iter_mut() {
                *c = 0.0;
            }
            rank += 1;
        }
        Ok(PivotedQr {
            cols,
            qtb,
            perm,
            rank,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Basic solution: back substitution on `R11`, zero for the columns past the rank.
    pub fn basic_solution(&self) -> Vec<f64> {
        let r = self.rank;
        let mut x = vec![0.0; r];
        for i in (0..r).rev() {
            let mut acc = self.qtb[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                acc -= self.cols[j][i] * xj;
            }
            x[i] = acc / self.cols[i][i];
        }
        let mut out = vec![0.0; self.cols.len()];
        for (i, xi) in x.into_iter().enumerate() {
            out[self.perm[i]] = xi;
        }
        out
    }

    /// The rank-truncated system `[R11 R12] P^T x = (Q^T b)[..rank]`, with
    /// columns back in their original order. Its null space is exact, so
    /// regularized solves on it do not pick up rounding noise from the
    /// discarded block.
    pub fn truncated_system(&self) -> (Matrix, Vec<f64>) {
        let r = self.rank;
        let mut a = Matrix::zeros(r, self.cols.len());
        for (j, col) in self.cols.iter().enumerate() {
            for i in 0..r {
                a.set(i, self.perm[j], col[i]);
            }
        }
        (a, self.qtb[..r].to_vec())
    }
}

/// Minimizes `||a x - b||` with Householder QR and column pivoting.
///
/// A diagonal entry of R counts towards the rank when it exceeds
/// `rank_tol * |R[0,0]|`. For rank-deficient systems the basic solution is
/// returned: coefficients of the columns that were pivoted out are zero.
pub fn lstsq(a: &Matrix, b: &[f64], rank_tol: f64) -> Result<LeastSquares> {
    let qr = PivotedQr::new(a, b, rank_tol)?;
    Ok(LeastSquares {
        coefficients: qr.basic_solution(),
        rank: qr.rank(),
    })
}

/// Thin singular value decomposition `a = u * diag(s) * v^T`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m x r` left singular vectors, `r = min(m, n)`.
    pub u: Matrix,
    /// Nonincreasing singular values, length `r`.
    pub singular_values: Vec<f64>,
    /// `n x r` right singular vectors.
    pub v: Matrix,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &Matrix) -> Svd {
    if a.nrows() < a.ncols() {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    let (m, n) = (a.nrows(), a.ncols());
    let mut u: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = dot(&u[i], &u[i]);
                let beta = dot(&u[j], &u[j]);
                let gamma = dot(&u[i], &u[j]);
                if gamma == 0.0 || libm::fabs(gamma) <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut u, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = u.iter().map(|c| norm(c)).enumerate().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut u_out = Matrix::zeros(m, n);
    let mut v_out = Matrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (out_j, &(j, sigma)) in order.iter().enumerate() {
        singular_values.push(sigma);
        for i in 0..m {
            u_out.set(i, out_j, if sigma > 0.0 { u[j][i] / sigma } else { 0.0 });
        }
        for i in 0..n {
            v_out.set(i, out_j, v[j][i]);
        }
    }
    Svd {
        u: u_out,
        singular_values,
        v: v_out,
    }
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    let (ci, cj) = (&mut left[i], &mut right[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}
