//! Dense univariate polynomials with complex coefficients, stored in
//! ascending degree order.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Poly<T> {
    /// Builds a polynomial from ascending coefficients, dropping exact trailing zeros.
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        let mut p = Poly { coeffs };
        p.trim_exact();
        p
    }

    pub fn from_real(coeffs: &[T]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Self::new(vec![Complex::zero(), Complex::one()])
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<Complex<T>> {
        self.coeffs.last().copied()
    }

    fn trim_exact(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    /// Drops leading coefficients whose modulus is below `rel` times the
    /// largest coefficient modulus. Used after symbolic manipulation where
    /// cancellation leaves roundoff residue in the top coefficients.
    pub fn trimmed_rel(mut self, rel: T) -> Self {
        let scale = self.max_abs();
        while self.coeffs.last().is_some_and(|c| c.norm() <= rel * scale) {
            self.coeffs.pop();
        }
        self
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::zero(), |acc, &c| acc * z + c)
    }

    /// `Σ |c_k| |z|^k`, the natural scale for rounding error in `eval`.
    pub fn eval_abs(&self, z: Complex<T>) -> T {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * from_usize::<T>(k))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, k: usize| p.coeffs.get(k).copied().unwrap_or_else(Complex::zero);
        Self::new((0..n).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Complex::<T>::one()))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = Self::constant(Complex::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Polynomial in `y` equal to `self(i·y)`.
    pub fn on_imaginary_axis(&self) -> Self {
        let mut unit = Complex::<T>::one();
        let i = Complex::<T>::i();
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| {
                    let out = c * unit;
                    unit = unit * i;
                    out
                })
                .collect(),
        )
    }

    /// Polynomial whose coefficients are the complex conjugates of these; on
    /// the real line it evaluates to the conjugate of `self`.
    pub fn conj_coeffs(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.coeffs.iter().map(|c| c.re).collect()
    }

    /// Synthetic division by `(z - r)`, discarding the remainder.
    pub fn deflate(&self, r: Complex<T>) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        let mut q = vec![Complex::zero(); n - 1];
        let mut carry = Complex::zero();
        for k in (1..n).rev() {
            carry = carry * r + self.coeffs[k];
            q[k - 1] = carry;
        }
        Self::new(q)
    }

    /// All complex roots by simultaneous (Aberth-Ehrlich) iteration followed
    /// by Newton polishing. Returns an empty list for constants.
    pub fn roots(&self) -> Vec<Complex<T>> {
        let deg = match self.degree() {
            Some(d) if d >= 1 => d,
            _ => return Vec::new(),
        };
        let lead = self.coeffs[deg];
        let monic: Vec<Complex<T>> = self.coeffs.iter().map(|&c| c / lead).collect();
        let monic = Poly { coeffs: monic };
        if deg == 1 {
            return vec![-monic.coeffs[0]];
        }
        let dp = monic.derivative();
        let bound = T::one()
            + monic.coeffs[..deg]
                .iter()
                .fold(T::zero(), |m, c| m.max(c.norm()));
        let radius = bound * lit(0.5);
        let mut zs: Vec<Complex<T>> = (0..deg)
            .map(|k| {
                let angle = T::TAU() * from_usize::<T>(k) / from_usize::<T>(deg) + lit(0.4);
                Complex::from_polar(radius, angle)
            })
            .collect();
        let tol = T::epsilon() * lit(4.0);
        for _ in 0..500 {
            let mut moved = T::zero();
            for i in 0..deg {
                let zi = zs[i];
                let p = monic.eval(zi);
                if p.is_zero() {
                    continue;
                }
                let ratio = p / dp.eval(zi);
                let repulsion = zs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .fold(Complex::<T>::zero(), |acc, (_, &zj)| {
                        let d = zi - zj;
                        if d.is_zero() {
                            acc
                        } else {
                            acc + d.inv()
                        }
                    });
                let denom = Complex::<T>::one() - ratio * repulsion;
                let step = if denom.is_zero() { ratio } else { ratio / denom };
                if !crate::scalar::is_finite_c(step) {
                    continue;
                }
                zs[i] = zi - step;
                moved = moved.max(step.norm() / (T::one() + zs[i].norm()));
            }
            if moved <= tol {
                break;
            }
        }
        for z in zs.iter_mut() {
            for _ in 0..3 {
                let d = dp.eval(*z);
                if d.is_zero() {
                    break;
                }
                let step = monic.eval(*z) / d;
                if !crate::scalar::is_finite_c(step) {
                    break;
                }
                *z = *z - step;
            }
        }
        zs
    }
}

/// Composition of rational functions: `(p/q) ∘ (r/s)` as a numerator,
/// denominator pair, via `Σ c_k r^k s^(m-k)` with `m = max(deg p, deg q)`.
pub fn compose_rational<T: Real>(
    (p, q): (&Poly<T>, &Poly<T>),
    (r, s): (&Poly<T>, &Poly<T>),
) -> (Poly<T>, Poly<T>) {
    let m = p.degree().unwrap_or(0).max(q.degree().unwrap_or(0));
    let r_pows: Vec<Poly<T>> = (0..=m).map(|k| r.pow(k)).collect();
    let s_pows: Vec<Poly<T>> = (0..=m).map(|k| s.pow(k)).collect();
    let homogenize = |f: &Poly<T>| {
        f.coeffs()
            .iter()
            .enumerate()
            .fold(Poly::zero(), |acc, (k, &c)| {
                acc.add(&r_pows[k].mul(&s_pows[m - k]).scale(c))
            })
    };
    let rel = T::epsilon() * lit(64.0);
    (homogenize(p).trimmed_rel(rel), homogenize(q).trimmed_rel(rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn p(cs: &[(f64, f64)]) -> Poly<f64> {
        Poly::new(cs.iter().map(|&(a, b)| c(a, b)).collect())
    }

    #[test]
    fn trims_trailing_zeros() {
        let q = p(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert_eq!(q.degree(), Some(0));
        assert!(p(&[(0.0, 0.0)]).is_zero());
    }

    #[test]
    fn horner_and_derivative() {
        let q = p(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(q.eval(c(0.0, 1.0)), c(0.0, 0.0));
        assert_eq!(q.derivative(), p(&[(0.0, 0.0), (2.0, 0.0)]));
    }

    #[test]
    fn roots_of_quadratic() {
        // z^2 + 1
        let q = p(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let mut rs = q.roots();
        rs.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((rs[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((rs[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn roots_of_complex_cubic() {
        let targets = [c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0)];
        let q = targets.iter().fold(Poly::<f64>::constant(c(1.0, 0.0)), |acc, &r| {
            acc.mul(&Poly::new(vec![-r, c(1.0, 0.0)]))
        });
        let rs = q.roots();
        for t in targets {
            assert!(rs.iter().any(|r| (r - t).norm() < 1e-10), "missing {t}");
        }
    }

    #[test]
    fn deflation_removes_root() {
        let q = p(&[(-2.0, 0.0), (1.0, 0.0)]).mul(&p(&[(3.0, 0.0), (1.0, 0.0)]));
        assert_eq!(q.deflate(c(2.0, 0.0)), p(&[(3.0, 0.0), (1.0, 0.0)]));
    }

    #[test]
    fn composition_of_rationals() {
        // (z^2 + 1)/z ∘ 2z = (4z^2 + 1)/(2z)
        let (n, d) = compose_rational(
            (&p(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]), &p(&[(0.0, 0.0), (1.0, 0.0)])),
            (&p(&[(0.0, 0.0), (2.0, 0.0)]), &p(&[(1.0, 0.0)])),
        );
        assert_eq!(n, p(&[(1.0, 0.0), (0.0, 0.0), (4.0, 0.0)]));
        assert_eq!(d, p(&[(0.0, 0.0), (2.0, 0.0)]));
    }

    #[test]
    fn imaginary_axis_substitution() {
        // z^2 + z at z = iy is -y^2 + iy
        let q = p(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0)]).on_imaginary_axis();
        assert_eq!(q, p(&[(0.0, 0.0), (0.0, 1.0), (-1.0, 0.0)]));
    }
}
