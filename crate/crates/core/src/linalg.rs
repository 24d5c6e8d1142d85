//! Small dense complex linear algebra: Hermitian eigenvalues by cyclic
//! Jacobi on the real symmetric embedding, and the largest singular value
//! by power iteration.

use num_complex::Complex;
use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::scalar::{from_usize, lit, Real};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(columns: &[Vec<Complex<T>>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |i, j| columns[j][i])
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        Self::from_fn(n, m, |i, j| Complex::new(lit(rows[i][j]), T::zero()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn max_diagonal(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::neg_infinity(), |m, i| m.max(self[(i, i)].re))
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(A + A*) / 2`.
    pub fn hermitized(&self) -> Self {
        let half = lit::<T>(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `A* x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate().take(self.rows) {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a.conj() * xi;
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(HardyError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Quadratic form `Σ conj(c_i) A_ij c_j`, real part.
    pub fn quadratic_form(&self, c: &[Complex<T>]) -> T {
        let ac = self.mul_vec(c);
        c.iter()
            .zip(&ac)
            .fold(Complex::<T>::zero(), |s, (&ci, &v)| s + ci.conj() * v)
            .re
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_norm<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().fold(T::zero(), |s, c| s + c.norm_sqr()).sqrt()
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    /// Ascending.
    pub values: Vec<T>,
    /// `vectors[k]` is a unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<Complex<T>>>,
}

/// Eigenvalues and eigenvectors of the Hermitian matrix `a` (only the
/// Hermitian part is used).
///
/// `A = X + iY` is embedded as the real symmetric `[[X, -Y], [Y, X]]`,
/// whose spectrum is that of `A` with every eigenvalue doubled; the
/// embedding is diagonalized by cyclic Jacobi rotations.
pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> HermitianEigen<T> {
    let n = a.rows();
    let m = 2 * n;
    let mut s = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let v = (a[(i, j)] + a[(j, i)].conj()) * lit::<T>(0.5);
            s[i * m + j] = v.re;
            s[(i + n) * m + (j + n)] = v.re;
            s[i * m + (j + n)] = -v.im;
            s[(i + n) * m + j] = v.im;
        }
    }
    let mut v = vec![T::zero(); m * m];
    for i in 0..m {
        v[i * m + i] = T::one();
    }
    let frob = s.iter().fold(T::zero(), |acc, x| acc + *x * *x).sqrt();
    let threshold = T::epsilon() * frob * lit(1e-2);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..m {
            for q in (p + 1)..m {
                off = off + s[p * m + q] * s[p * m + q];
            }
        }
        if off.sqrt() <= threshold || off == T::zero() {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = s[p * m + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = s[p * m + p];
                let aqq = s[q * m + q];
                let theta = (aqq - app) / (lit::<T>(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let skp = s[k * m + p];
                    let skq = s[k * m + q];
                    s[k * m + p] = cs * skp - sn * skq;
                    s[k * m + q] = sn * skp + cs * skq;
                }
                for k in 0..m {
                    let spk = s[p * m + k];
                    let sqk = s[q * m + k];
                    s[p * m + k] = cs * spk - sn * sqk;
                    s[q * m + k] = sn * spk + cs * sqk;
                }
                for k in 0..m {
                    let vkp = v[k * m + p];
                    let vkq = v[k * m + q];
                    v[k * m + p] = cs * vkp - sn * vkq;
                    v[k * m + q] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| s[i * m + i].partial_cmp(&s[j * m + j]).unwrap());
    // Eigenvalues come in pairs; take every other one.
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for pair in order.chunks(2) {
        let k = pair[0];
        values.push(s[k * m + k]);
        let vec: Vec<Complex<T>> = (0..n)
            .map(|i| Complex::new(v[i * m + k], v[(i + n) * m + k]))
            .collect();
        let nrm = vec_norm(&vec);
        vectors.push(vec.into_iter().map(|c| c / nrm).collect());
    }
    HermitianEigen { values, vectors }
}

/// Result of a power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration<T> {
    pub sigma: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest singular value of `apply` (with adjoint `apply_adj`) by power
/// iteration on `A*A`, starting from the normalized all-ones vector. Stops
/// when the relative change of the Rayleigh quotient drops below `tol`.
pub fn largest_singular_value_with<T: Real>(
    dim: usize,
    apply: impl Fn(&[Complex<T>]) -> Vec<Complex<T>>,
    apply_adj: impl Fn(&[Complex<T>]) -> Vec<Complex<T>>,
    tol: T,
    max_iter: usize,
) -> PowerIteration<T> {
    if dim == 0 {
        return PowerIteration {
            sigma: T::zero(),
            iterations: 0,
            converged: true,
        };
    }
    let start = T::one() / from_usize::<T>(dim).sqrt();
    let mut x = vec![Complex::new(start, T::zero()); dim];
    let mut prev = T::zero();
    for it in 1..=max_iter {
        let ax = apply(&x);
        let sigma_sq = ax.iter().fold(T::zero(), |s, c| s + c.norm_sqr());
        let y = apply_adj(&ax);
        let ny = vec_norm(&y);
        if ny == T::zero() {
            return PowerIteration {
                sigma: T::zero(),
                iterations: it,
                converged: true,
            };
        }
        x = y.into_iter().map(|c| c / ny).collect();
        if (sigma_sq - prev).abs() <= tol * sigma_sq {
            return PowerIteration {
                sigma: sigma_sq.sqrt(),
                iterations: it,
                converged: true,
            };
        }
        prev = sigma_sq;
    }
    let ax = apply(&x);
    PowerIteration {
        sigma: vec_norm(&ax),
        iterations: max_iter,
        converged: false,
    }
}

pub fn largest_singular_value<T: Real>(a: &CMatrix<T>, tol: T, max_iter: usize) -> PowerIteration<T> {
    largest_singular_value_with(
        a.cols(),
        |x| a.mul_vec(x),
        |y| a.adjoint_mul_vec(y),
        tol,
        max_iter,
    )
}
