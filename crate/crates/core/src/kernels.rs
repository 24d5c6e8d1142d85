//! Kernels on the half-plane and sampled positivity certificates.
//!
//! A kernel `K` is positive when every Gram matrix `[K(x_i, x_j)]` is
//! positive semidefinite. A sampled check can only falsify positivity; a
//! PSD verdict means "consistent with positivity on these points".

use num_complex::Complex;
use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::map::MapSpec;
use crate::scalar::{from_usize, lit, Real};

/// Kernel expression `K(z, w)`.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelExpr<T: Real> {
    /// `1 / (z + conj w)`, the reproducing kernel of `H²`.
    Szego,
    /// `(g(z) + conj g(w)) / (z + conj w)`.
    Nevanlinna { g: MapSpec<T> },
    /// `inner(φ(z), φ(w))`.
    PushForward {
        phi: MapSpec<T>,
        inner: Box<KernelExpr<T>>,
    },
    Scaled { c: T, inner: Box<KernelExpr<T>> },
    Difference {
        left: Box<KernelExpr<T>>,
        right: Box<KernelExpr<T>>,
    },
    SchurProduct {
        left: Box<KernelExpr<T>>,
        right: Box<KernelExpr<T>>,
    },
}

impl<T: Real> KernelExpr<T> {
    pub fn push_forward(phi: MapSpec<T>, inner: KernelExpr<T>) -> Self {
        KernelExpr::PushForward {
            phi,
            inner: Box::new(inner),
        }
    }

    pub fn scaled(c: T, inner: KernelExpr<T>) -> Self {
        KernelExpr::Scaled {
            c,
            inner: Box::new(inner),
        }
    }

    pub fn difference(left: KernelExpr<T>, right: KernelExpr<T>) -> Self {
        KernelExpr::Difference {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn schur(left: KernelExpr<T>, right: KernelExpr<T>) -> Self {
        KernelExpr::SchurProduct {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// `λ/(z + conj w) - 1/(φ(z) + conj φ(w))`.
    pub fn norm_kernel(phi: MapSpec<T>, lambda: T) -> Self {
        Self::difference(
            Self::scaled(lambda, KernelExpr::Szego),
            Self::push_forward(phi, KernelExpr::Szego),
        )
    }

    pub fn eval(&self, z: Complex<T>, w: Complex<T>) -> Result<Complex<T>> {
        match self {
            KernelExpr::Szego => {
                let d = z + w.conj();
                if d.is_zero() {
                    return Err(HardyError::pole(z));
                }
                Ok(d.inv())
            }
            KernelExpr::Nevanlinna { g } => {
                let d = z + w.conj();
                if d.is_zero() {
                    return Err(HardyError::pole(z));
                }
                Ok((g.evaluate(z)? + g.evaluate(w)?.conj()) / d)
            }
            KernelExpr::PushForward { phi, inner } => inner.eval(phi.evaluate(z)?, phi.evaluate(w)?),
            KernelExpr::Scaled { c, inner } => Ok(inner.eval(z, w)? * *c),
            KernelExpr::Difference { left, right } => Ok(left.eval(z, w)? - right.eval(z, w)?),
            KernelExpr::SchurProduct { left, right } => Ok(left.eval(z, w)? * right.eval(z, w)?),
        }
    }
}

/// Gram matrix `[K(x_i, x_j)]`, hermitized by averaging with its adjoint.
pub fn gram_matrix<T: Real>(k: &KernelExpr<T>, points: &[Complex<T>]) -> Result<CMatrix<T>> {
    let n = points.len();
    let mut raw = CMatrix::zeros(n, n);
    for (i, &x) in points.iter().enumerate() {
        for (j, &y) in points.iter().enumerate() {
            raw[(i, j)] = k.eval(x, y)?;
        }
    }
    Ok(raw.hermitized())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub enum PsdVerdict<T: Real> {
    #[serde(rename = "PSD")]
    Psd,
    /// Scalars `c_i` with `Σ c_i conj(c_j) K(x_i, x_j) < -tolerance`.
    #[serde(rename = "NotPSD")]
    NotPsd { witness: Vec<Complex<T>> },
}

/// Outcome of a sampled positivity test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub struct PsdReport<T: Real> {
    pub points: Vec<Complex<T>>,
    #[serde(skip)]
    pub gram: Option<CMatrix<T>>,
    pub min_eigenvalue: T,
    /// Effective threshold: `tol · n · max(1, max diagonal)`.
    pub tolerance: T,
    pub verdict: PsdVerdict<T>,
}

impl<T: Real> PsdReport<T> {
    pub fn is_psd(&self) -> bool {
        self.verdict == PsdVerdict::Psd
    }

    pub fn witness(&self) -> Option<&[Complex<T>]> {
        match &self.verdict {
            PsdVerdict::NotPsd { witness } => Some(witness),
            PsdVerdict::Psd => None,
        }
    }
}

/// Default relative floor for PSD decisions.
pub fn default_psd_tol<T: Real>() -> T {
    lit(1e-10)
}

/// PSD test: the verdict is PSD iff the smallest eigenvalue is at least
/// `-tol · n · max(1, max diagonal)`.
pub fn psd_check<T: Real>(gram: &CMatrix<T>, tol: T) -> Result<PsdReport<T>> {
    if !gram.is_square() {
        return Err(HardyError::DimensionMismatch(format!(
            "Gram matrix is {}x{}",
            gram.rows(),
            gram.cols()
        )));
    }
    let defect = gram.hermitian_defect();
    let scale = T::one().max(gram.max_abs());
    if defect > lit::<T>(1e-12) * scale {
        return Err(HardyError::NonHermitianInput(defect.to_f64().unwrap_or(f64::NAN)));
    }
    let n = gram.rows();
    if n == 0 {
        return Ok(PsdReport {
            points: Vec::new(),
            gram: Some(gram.clone()),
            min_eigenvalue: T::zero(),
            tolerance: T::zero(),
            verdict: PsdVerdict::Psd,
        });
    }
    let eig = hermitian_eigen(gram);
    let min_eigenvalue = eig.values[0];
    let tolerance = tol * from_usize::<T>(n) * T::one().max(gram.max_diagonal());
    let verdict = if min_eigenvalue >= -tolerance {
        PsdVerdict::Psd
    } else {
        // Σ c_i conj(c_j) A_ij = v* A v for c = conj(v).
        PsdVerdict::NotPsd {
            witness: eig.vectors[0].iter().map(|c| c.conj()).collect(),
        }
    };
    Ok(PsdReport {
        points: Vec::new(),
        gram: Some(gram.clone()),
        min_eigenvalue,
        tolerance,
        verdict,
    })
}

/// `Σ c_i conj(c_j) A_ij`.
pub fn kernel_form<T: Real>(gram: &CMatrix<T>, c: &[Complex<T>]) -> T {
    let mut acc = Complex::<T>::zero();
    for (i, &ci) in c.iter().enumerate() {
        for (j, &cj) in c.iter().enumerate() {
            acc = acc + ci * cj.conj() * gram[(i, j)];
        }
    }
    acc.re
}

/// Gram matrix of `k` at `points` followed by [`psd_check`].
pub fn kernel_psd_report<T: Real>(
    k: &KernelExpr<T>,
    points: &[Complex<T>],
    tol: T,
) -> Result<PsdReport<T>> {
    let gram = gram_matrix(k, points)?;
    let mut report = psd_check(&gram, tol)?;
    report.points = points.to_vec();
    Ok(report)
}

/// Entrywise (Hadamard) product.
pub fn schur_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(HardyError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(CMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] * b[(i, j)]))
}

/// Positivity of `(g(z) + conj g(w)) / (z + conj w)`, which holds exactly
/// when `Re g > 0` on the half-plane.
pub fn nevanlinna_check<T: Real>(
    g: &MapSpec<T>,
    points: &[Complex<T>],
    tol: T,
) -> Result<PsdReport<T>> {
    kernel_psd_report(&KernelExpr::Nevanlinna { g: g.clone() }, points, tol)
}

/// Positivity of `λ/(z + conj w) - 1/(φ(z) + conj φ(w))`, which holds
/// exactly when `λ >= φ'(∞)`.
pub fn norm_kernel_check<T: Real>(
    phi: &MapSpec<T>,
    lambda: T,
    points: &[Complex<T>],
    tol: T,
) -> Result<PsdReport<T>> {
    if !(lambda > T::zero()) {
        return Err(HardyError::DomainError(format!("λ = {lambda} must be positive")));
    }
    kernel_psd_report(&KernelExpr::norm_kernel(phi.clone(), lambda), points, tol)
}

/// Both sides of
/// `1/(z + w̄) - λ⁻¹/(φ(z) + conj φ(w))
///   = [1/(φ(z) + conj φ(w))] · [((φ(z) - z/λ) + conj(φ(w) - w/λ)) / (z + w̄)]`.
pub fn factorization_check<T: Real>(
    phi: &MapSpec<T>,
    lambda: T,
    z: Complex<T>,
    w: Complex<T>,
) -> Result<(Complex<T>, Complex<T>)> {
    if !(z.re > T::zero() && w.re > T::zero()) {
        return Err(HardyError::DomainError("points must lie in the half-plane".into()));
    }
    let (pz, pw) = (phi.evaluate(z)?, phi.evaluate(w)?);
    let inv = T::one() / lambda;
    let s = z + w.conj();
    let t = pz + pw.conj();
    let lhs = s.inv() - t.inv() * inv;
    let rhs = t.inv() * (((pz - z * inv) + (pw - w * inv).conj()) / s);
    Ok((lhs, rhs))
}

/// Deterministic certification point sets: log-spaced radii in
/// `[10⁻¹, 10⁴]` crossed with angles `{0, ±π/4, ±0.45π}`, at most 24 points.
/// Set 0 is the plain grid; later sets jitter every radius and angle.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSets<T> {
    pub radii_per_set: usize,
    pub max_points: usize,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Real> Default for PointSets<T> {
    fn default() -> Self {
        PointSets {
            radii_per_set: 5,
            max_points: 24,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<T: Real> PointSets<T> {
    pub fn set(&self, index: usize) -> Vec<Complex<T>> {
        let angles = [0.0, 0.25, -0.25, 0.45, -0.45];
        let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut jitter = || {
            if index == 0 {
                return 0.0;
            }
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut x = state;
            x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            x ^= x >> 31;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let count = self.radii_per_set.max(1);
        let mut out = Vec::new();
        for k in 0..count {
            let t = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
            let log_r = -1.0 + 5.0 * t + 0.4 * jitter();
            for &a in &angles {
                let theta = (a + 0.04 * jitter()) * std::f64::consts::PI;
                let theta = theta.clamp(-0.49 * std::f64::consts::PI, 0.49 * std::f64::consts::PI);
                out.push(Complex::from_polar(lit::<T>(10f64.powf(log_r)), lit(theta)));
                if out.len() == self.max_points {
                    return out;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use approx::assert_relative_eq;

    fn pts(v: &[(f64, f64)]) -> Vec<Complex<f64>> {
        v.iter().map(|&(a, b)| c(a, b)).collect()
    }

    #[test]
    fn szego_gram() {
        let g = gram_matrix(&KernelExpr::Szego, &pts(&[(1.0, 0.0), (2.0, 0.0)])).unwrap();
        assert_relative_eq!(g[(0, 0)].re, 0.5);
        assert_relative_eq!(g[(0, 1)].re, 1.0 / 3.0);
        assert_relative_eq!(g[(1, 1)].re, 0.25);
    }

    #[test]
    fn nevanlinna_identity_is_all_ones() {
        let g = gram_matrix(
            &KernelExpr::Nevanlinna {
                g: MapSpec::identity(),
            },
            &pts(&[(1.0, 0.0), (2.0, 1.0), (0.5, -3.0)]),
        )
        .unwrap();
        assert!(g.as_slice().iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn dilation_cancellation() {
        let k = KernelExpr::difference(
            KernelExpr::scaled(0.5, KernelExpr::Szego),
            KernelExpr::push_forward(MapSpec::affine(2.0, c(0.0, 0.0)).unwrap(), KernelExpr::Szego),
        );
        let g = gram_matrix(&k, &pts(&[(1.0, 0.0), (1.0, 1.0), (3.0, 0.0)])).unwrap();
        assert!(g.max_abs() < 1e-16);
    }

    #[test]
    fn psd_small_cases() {
        let a = CMatrix::<f64>::from_real_rows(&[vec![0.5, 1.0 / 3.0], vec![1.0 / 3.0, 0.25]]);
        let r = psd_check(&a, 1e-10).unwrap();
        assert!(r.is_psd());
        // trace 0.75, det 1/72
        let expect = (0.75 - (0.75f64 * 0.75 - 4.0 / 72.0).sqrt()) / 2.0;
        assert_relative_eq!(r.min_eigenvalue, expect, epsilon = 1e-14);
        assert_relative_eq!(r.min_eigenvalue, 0.019_00, epsilon = 1e-5);

        let b = CMatrix::<f64>::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        let r = psd_check(&b, 1e-10).unwrap();
        assert_relative_eq!(r.min_eigenvalue, -1.0, epsilon = 1e-14);
        let w = r.witness().unwrap();
        assert_relative_eq!((w[0] + w[1]).norm(), 0.0, epsilon = 1e-14);
        assert!(kernel_form(&b, w) < -r.tolerance);

        assert!(psd_check(&CMatrix::<f64>::zeros(3, 3), 1e-10).unwrap().is_psd());
    }

    #[test]
    fn non_hermitian_rejected() {
        let b = CMatrix::<f64>::from_real_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(psd_check(&b, 1e-10), Err(HardyError::NonHermitianInput(_))));
    }

    #[test]
    fn schur_products() {
        let ones = CMatrix::<f64>::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let a = CMatrix::<f64>::from_real_rows(&[vec![1.0, 3.0], vec![3.0, 1.0]]);
        assert_eq!(schur_product(&ones, &a).unwrap(), a);
        let d = CMatrix::<f64>::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]]);
        assert_eq!(schur_product(&d, &a).unwrap(), d);
        assert!(schur_product(&a, &CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn nevanlinna_examples() {
        let id = MapSpec::identity();
        assert!(nevanlinna_check(&id, &pts(&[(1.0, 0.0), (2.0, 0.0), (3.0, 1.0)]), 1e-10)
            .unwrap()
            .is_psd());
        let inv = MapSpec::rational_real(&[1.0], &[0.0, 1.0]).unwrap();
        let points = pts(&[(1.0, 0.0), (2.0, 0.0)]);
        let r = nevanlinna_check(&inv, &points, 1e-10).unwrap();
        assert!(r.is_psd());
        // rank one: 1/(z conj w)
        let g = r.gram.unwrap();
        assert_relative_eq!(g[(0, 1)].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.min_eigenvalue, 0.0, epsilon = 1e-15);
        let neg = MapSpec::rational_real(&[0.0, -1.0], &[1.0]).unwrap();
        let r = nevanlinna_check(&neg, &pts(&[(1.0, 0.0)]), 1e-10).unwrap();
        assert!(!r.is_psd());
        assert_relative_eq!(r.min_eigenvalue, -1.0);
    }

    #[test]
    fn norm_kernel_examples() {
        let dil = MapSpec::affine(2.0, c(0.0, 0.0)).unwrap();
        let r = norm_kernel_check(&dil, 0.5, &PointSets::default().set(0), 1e-10).unwrap();
        assert!(r.is_psd());
        assert!(r.gram.unwrap().max_abs() < 1e-15);
        let r = norm_kernel_check(&dil, 0.4, &pts(&[(1.0, 0.0)]), 1e-10).unwrap();
        assert!(!r.is_psd());
        assert_relative_eq!(r.min_eigenvalue, -0.05, epsilon = 1e-15);
    }

    #[test]
    fn factorization_trivial_cases() {
        let (l, r) = factorization_check(&MapSpec::identity(), 1.0, c(1.0, 2.0), c(3.0, -1.0)).unwrap();
        assert_eq!(l, c(0.0, 0.0));
        assert_eq!(r, c(0.0, 0.0));
        let dil = MapSpec::affine(2.0, c(0.0, 0.0)).unwrap();
        let (l, r) = factorization_check(&dil, 0.5, c(1.0, 2.0), c(3.0, -1.0)).unwrap();
        assert!(l.norm() < 1e-16 && r.norm() < 1e-16);
    }

    #[test]
    fn point_sets_are_capped_and_in_half_plane() {
        let gen = PointSets::<f64>::default();
        for s in 0..10 {
            let p = gen.set(s);
            assert_eq!(p.len(), 24);
            assert!(p.iter().all(|z| z.re > 0.0));
        }
        assert_ne!(gen.set(1), gen.set(2));
        assert_eq!(gen.set(3), gen.set(3));
    }
}
