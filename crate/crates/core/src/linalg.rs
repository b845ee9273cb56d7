//! Dense square-matrix kernel.
//!
//! Everything the integrators need reduces to three primitives on small
//! (m <= ~30) dense matrices: a partially pivoted PLU factorization (solves
//! plus determinants of `Id ± Ω` and of the metric), a Cholesky factorization
//! (momentum draws), and matrix/vector products. Determinants are carried as
//! `(log|det|, sign)` pairs so products of several of them cannot overflow.

use std::ops::{Index, IndexMut};

use crate::error::{GeomcError, Result};

/// Pivots smaller than this are treated as exact zeros.
pub const SINGULAR_PIVOT: f64 = 1e-300;

/// Relative tolerance used when checking symmetry before a Cholesky factorization.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Square real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries, rejecting empty or non-finite input.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(GeomcError::invalid("dim", "matrix dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(GeomcError::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(GeomcError::NonFinite { what: "matrix entries" });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(GeomcError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_mat(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.dim)
            .map(|i| x[i] * self.row(i).iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `Id + s·self`, the shape every velocity update factorizes.
    pub fn identity_plus(&self, s: f64) -> DenseMatrix {
        let mut out = self.scaled(s);
        for i in 0..self.dim {
            out.data[i * self.dim + i] += 1.0;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.symmetry_violation(rel_tol).is_none()
    }

    fn symmetry_violation(&self, rel_tol: f64) -> Option<(usize, usize, f64)> {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let (a, b) = (self[(i, j)], self[(j, i)]);
                let gap = (a - b).abs();
                if gap > rel_tol * a.abs().max(b.abs()).max(1.0) {
                    return Some((i, j, gap));
                }
            }
        }
        None
    }

    pub fn plu(&self) -> Result<PluFactors> {
        PluFactors::factorize(self)
    }

    pub fn cholesky(&self) -> Result<CholeskyFactors> {
        CholeskyFactors::factorize(self)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// `(log|det|, sign)`; sign is `±1.0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub sign: f64,
}

/// `A = P·L·U` with partial pivoting on the largest column magnitude.
///
/// `L` (unit diagonal, implicit) and `U` are packed into one matrix. Row `i`
/// of `L·U` is row `perm[i]` of `A`.
#[derive(Debug, Clone)]
pub struct PluFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
    perm_sign: f64,
}

impl PluFactors {
    pub fn factorize(a: &DenseMatrix) -> Result<Self> {
        if !a.is_finite() {
            return Err(GeomcError::NonFinite { what: "matrix to factorize" });
        }
        let n = a.dim;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut perm_sign = 1.0;

        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, lu[(r, col)].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs < SINGULAR_PIVOT {
                return Err(GeomcError::SingularMatrix {
                    column: col,
                    pivot: pivot_abs,
                });
            }
            if pivot_row != col {
                for j in 0..n {
                    lu.data.swap(col * n + j, pivot_row * n + j);
                }
                perm.swap(col, pivot_row);
                perm_sign = -perm_sign;
            }
            let pivot = lu[(col, col)];
            for r in (col + 1)..n {
                let factor = lu[(r, col)] / pivot;
                lu[(r, col)] = factor;
                if factor == 0.0 {
                    continue;
                }
                for j in (col + 1)..n {
                    lu.data[r * n + j] -= factor * lu.data[col * n + j];
                }
            }
        }
        Ok(Self { lu, perm, perm_sign })
    }

    pub fn dim(&self) -> usize {
        self.lu.dim
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn perm_sign(&self) -> f64 {
        self.perm_sign
    }

    pub fn lower(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.dim(), |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.lu[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn upper(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.dim(), |i, j| if i <= j { self.lu[(i, j)] } else { 0.0 })
    }

    /// Rebuilds `P·L·U`; used by tests and sanity checks.
    pub fn reassemble(&self) -> DenseMatrix {
        let lu = self.lower().mul_mat(&self.upper());
        let mut out = DenseMatrix::zeros(self.dim());
        for (i, &src) in self.perm.iter().enumerate() {
            for j in 0..self.dim() {
                out[(src, j)] = lu[(i, j)];
            }
        }
        out
    }

    /// `Σ log|U_ii|` with sign `perm_sign · Π sign(U_ii)`.
    pub fn log_abs_det(&self) -> Result<LogDet> {
        let mut log_abs = 0.0;
        let mut sign = self.perm_sign;
        for i in 0..self.dim() {
            let u = self.lu[(i, i)];
            if u == 0.0 {
                return Err(GeomcError::SingularMatrix { column: i, pivot: 0.0 });
            }
            log_abs += u.abs().ln();
            if u < 0.0 {
                sign = -sign;
            }
        }
        Ok(LogDet { log_abs, sign })
    }

    /// Forward/backward substitution for `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(GeomcError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
            let d = row[i];
            if d == 0.0 {
                return Err(GeomcError::SingularMatrix { column: i, pivot: 0.0 });
            }
            x[i] = (x[i] - s) / d;
        }
        Ok(x)
    }

    /// `A⁻¹`, one solve per column of the identity.
    pub fn inverse(&self) -> Result<DenseMatrix> {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            for (i, x) in self.solve(&e)?.into_iter().enumerate() {
                inv[(i, j)] = x;
            }
            e[j] = 0.0;
        }
        Ok(inv)
    }
}

/// `A = L·Lᵀ` for symmetric positive-definite `A`.
#[derive(Debug, Clone)]
pub struct CholeskyFactors {
    lower: DenseMatrix,
}

impl CholeskyFactors {
    pub fn factorize(a: &DenseMatrix) -> Result<Self> {
        if !a.is_finite() {
            return Err(GeomcError::NonFinite { what: "matrix to factorize" });
        }
        if let Some((row, col, gap)) = a.symmetry_violation(SYMMETRY_TOL) {
            return Err(GeomcError::NotSymmetric { row, col, gap });
        }
        let n = a.dim;
        let mut l = DenseMatrix::zeros(n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(GeomcError::NotPositiveDefinite { row: j, value: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    /// `2 Σ log L_ii`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.lower.dim).map(|i| self.lower[(i, i)].ln()).sum::<f64>()
    }

    /// `L·z`; maps standard-normal draws to `Normal(0, A)`.
    pub fn mul_lower(&self, z: &[f64]) -> Vec<f64> {
        let n = self.lower.dim;
        (0..n)
            .map(|i| (0..=i).map(|k| self.lower[(i, k)] * z[k]).sum())
            .collect()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.lower.dim;
        if b.len() != n {
            return Err(GeomcError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
            y[i] = (y[i] - s) / l[(i, i)];
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|k| l[(k, i)] * y[k]).sum();
            y[i] = (y[i] - s) / l[(i, i)];
        }
        Ok(y)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
