//! The Cayley transform `τ(ζ) = (1 + ζ)/(1 - ζ)` from the unit disk onto
//! the right half-plane, conjugation of half-plane maps to disk maps, and
//! the orthonormal basis of `H²` of the half-plane it induces.
//!
//! The unitary `U: H²(half-plane) → H²(disk)` used throughout is
//! `(U f)(ζ) = √2 / (1 - ζ) · f(τ(ζ))`. It sends the kernel `k_w` to a
//! multiple of the disk kernel and `e_n = U⁻¹ ζⁿ` to
//! `√2 (z - 1)ⁿ / (z + 1)ⁿ⁺¹`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::map::MapSpec;
use crate::poly::{compose_rational, Poly};
use crate::scalar::{lit, Real};

/// `τ(ζ) = (1 + ζ)/(1 - ζ)`.
pub fn cayley<T: Real>(zeta: Complex<T>) -> Result<Complex<T>> {
    let den = Complex::<T>::one() - zeta;
    if den.is_zero() {
        return Err(HardyError::pole(zeta));
    }
    Ok((Complex::<T>::one() + zeta) / den)
}

/// `τ⁻¹(z) = (z - 1)/(z + 1)`.
pub fn inverse_cayley<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    let den = z + T::one();
    if den.is_zero() {
        return Err(HardyError::pole(z));
    }
    Ok((z - T::one()) / den)
}

fn tau_poly<T: Real>() -> (Poly<T>, Poly<T>) {
    let one = Complex::one();
    (Poly::new(vec![one, one]), Poly::new(vec![one, -one]))
}

fn tau_inv_poly<T: Real>() -> (Poly<T>, Poly<T>) {
    let one = Complex::one();
    (Poly::new(vec![-one, one]), Poly::new(vec![one, one]))
}

/// Disk self-map `ψ = τ⁻¹ ∘ φ ∘ τ` together with the map it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct ConjugatedMap<T: Real> {
    #[serde(flatten)]
    pub psi: MapSpec<T>,
    #[serde(rename = "conjugated_from")]
    pub source: MapSpec<T>,
    /// Whether `psi` is an exact rational map.
    pub exact: bool,
}

impl<T: Real> ConjugatedMap<T> {
    pub fn eval(&self, zeta: Complex<T>) -> Result<Complex<T>> {
        self.psi.evaluate(zeta)
    }
}

impl<'de, T: Real + DeserializeOwned> Deserialize<'de> for ConjugatedMap<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound(deserialize = "T: Real + DeserializeOwned"))]
        struct Raw<T: Real> {
            conjugated_from: MapSpec<T>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        conjugate_map(&raw.conjugated_from).map_err(serde::de::Error::custom)
    }
}

/// Conjugates `φ` by the Cayley transform. Rational, Möbius, affine maps and
/// their compositions conjugate symbolically; anything involving a black
/// box is conjugated pointwise.
pub fn conjugate_map<T: Real>(phi: &MapSpec<T>) -> Result<ConjugatedMap<T>> {
    phi.validate()?;
    let Some((p, q)) = phi.to_rational() else {
        let source = phi.clone();
        let psi = MapSpec::black_box("cayley_conjugate", move |zeta| {
            let nan = Complex::new(T::nan(), T::nan());
            cayley(zeta)
                .and_then(|z| source.evaluate(z))
                .and_then(inverse_cayley)
                .unwrap_or(nan)
        });
        return Ok(ConjugatedMap {
            psi,
            source: phi.clone(),
            exact: false,
        });
    };
    let (tn, td) = tau_poly();
    let (un, ud) = tau_inv_poly();
    let inner = compose_rational((&p, &q), (&tn, &td));
    let (num, den) = compose_rational((&un, &ud), (&inner.0, &inner.1));
    if den.is_zero() {
        return Err(HardyError::DegenerateSpec(
            "Cayley conjugation produced a zero denominator".into(),
        ));
    }
    Ok(ConjugatedMap {
        psi: simplify_disk_map(num, den),
        source: phi.clone(),
        exact: true,
    })
}

/// Normalizes low-degree results to Möbius (or affine) form.
fn simplify_disk_map<T: Real>(num: Poly<T>, den: Poly<T>) -> MapSpec<T> {
    let (dn, dd) = (num.degree().unwrap_or(0), den.degree().unwrap_or(0));
    if dn > 1 || dd > 1 {
        let lead = den.leading().unwrap();
        return MapSpec::Rational {
            num: num.scale(lead.inv()),
            den: den.scale(lead.inv()),
        };
    }
    let get = |p: &Poly<T>, k: usize| p.coeffs().get(k).copied().unwrap_or_else(Complex::zero);
    let (a, b, c, d) = (get(&num, 1), get(&num, 0), get(&den, 1), get(&den, 0));
    let norm = if d.is_zero() { c } else { d };
    let (a, b, c, d) = (a / norm, b / norm, c / norm, d / norm);
    if c.is_zero() && a.im == T::zero() && a.re > T::zero() && b.re >= T::zero() {
        return MapSpec::Affine { a: a.re, b };
    }
    MapSpec::Mobius { a, b, c, d }
}

/// Orthonormal basis element `e_n(z) = √2 (z - 1)ⁿ / (z + 1)ⁿ⁺¹`.
pub fn onb_eval<T: Real>(n: usize, z: Complex<T>) -> Complex<T> {
    let ratio = (z - T::one()) / (z + T::one());
    ratio.powu(n as u32) * T::SQRT_2() / (z + T::one())
}

/// Coefficients of the kernel `k_w` in the basis `{e_n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub struct OnbCoefficients<T: Real> {
    pub w: Complex<T>,
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Real> OnbCoefficients<T> {
    pub fn norm_sqr(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |s, c| s + c.norm_sqr())
    }

    /// `Σ c_n e_n(z)`.
    pub fn partial_sum(&self, z: Complex<T>) -> Complex<T> {
        let ratio = (z - T::one()) / (z + T::one());
        let base = Complex::new(T::SQRT_2(), T::zero()) / (z + T::one());
        let mut pow = Complex::<T>::one();
        let mut acc = Complex::zero();
        for &c in &self.coeffs {
            acc = acc + c * base * pow;
            pow = pow * ratio;
        }
        acc
    }
}

/// `c_n = conj(e_n(w))` for `n < count`, so that `k_w = Σ c_n e_n`.
pub fn kernel_coefficients<T: Real>(w: Complex<T>, count: usize) -> Result<OnbCoefficients<T>> {
    if !(w.re > T::zero()) {
        return Err(HardyError::DomainError(format!("Re w = {} is not positive", w.re)));
    }
    let ratio = ((w - T::one()) / (w + T::one())).conj();
    let mut cur = (Complex::new(T::SQRT_2(), T::zero()) / (w + T::one())).conj();
    let mut coeffs = Vec::with_capacity(count);
    for _ in 0..count {
        coeffs.push(cur);
        cur = cur * ratio;
    }
    Ok(OnbCoefficients { w, coeffs })
}

/// `(U f)(ζ)` given `f(τ(ζ))`.
pub fn transport_to_disk<T: Real>(value_at_tau: Complex<T>, zeta: Complex<T>) -> Complex<T> {
    value_at_tau * T::SQRT_2() / (Complex::<T>::one() - zeta)
}

/// Both sides of the identity
/// `Re z / Re φ(z) = |1 - ψ(ζ)|² / (1 - |ψ(ζ)|²) · (1 - |ζ|²) / |1 - ζ|²`
/// at `z = τ(ζ)`.
pub fn julia_identity_check<T: Real>(phi: &MapSpec<T>, zeta: Complex<T>) -> Result<(T, T)> {
    let psi = conjugate_map(phi)?;
    julia_identity_with(phi, &psi, zeta)
}

pub(crate) fn julia_identity_with<T: Real>(
    phi: &MapSpec<T>,
    psi: &ConjugatedMap<T>,
    zeta: Complex<T>,
) -> Result<(T, T)> {
    if !(zeta.norm() < T::one()) {
        return Err(HardyError::DomainError(format!("|ζ| = {} is not below 1", zeta.norm())));
    }
    let z = cayley(zeta)?;
    let w = phi.evaluate(z)?;
    if !(w.re > T::zero()) {
        return Err(HardyError::violation(z, w.re));
    }
    let lhs = z.re / w.re;
    let s = psi.eval(zeta)?;
    let one = Complex::<T>::one();
    let rhs = ((one - s).norm_sqr() / (T::one() - s.norm_sqr()))
        * ((T::one() - zeta.norm_sqr()) / (one - zeta).norm_sqr());
    Ok((lhs, rhs))
}

/// `1/(τ(ζ) + conj τ(η))` computed through the disk:
/// `(1 - ζ)(1 - conj η) / (2 (1 - ζ conj η))`.
pub fn szego_via_disk<T: Real>(zeta: Complex<T>, eta: Complex<T>) -> Complex<T> {
    let one = Complex::<T>::one();
    (one - zeta) * (one - eta.conj()) / ((one - zeta * eta.conj()) * lit::<T>(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use approx::assert_relative_eq;

    #[test]
    fn transform_values() {
        assert_eq!(cayley(c::<f64>(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let v = inverse_cayley(c::<f64>(2.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 1.0 / 3.0, epsilon = 1e-16);
        let i = cayley(c::<f64>(0.0, 1.0)).unwrap();
        assert!((i - c(0.0, 1.0)).norm() < 1e-15);
        assert!(cayley(c::<f64>(1.0, 0.0)).is_err());
        assert!(inverse_cayley(c::<f64>(-1.0, 0.0)).is_err());
    }

    #[test]
    fn conjugating_identity_gives_identity() {
        let cm = conjugate_map(&MapSpec::<f64>::identity()).unwrap();
        assert_eq!(cm.psi, MapSpec::identity());
        assert!(cm.exact);
    }

    #[test]
    fn conjugating_dilation() {
        // (1 + 3ζ)/(3 + ζ)
        let cm = conjugate_map(&MapSpec::<f64>::affine(2.0, c(0.0, 0.0)).unwrap()).unwrap();
        let at0 = cm.eval(c(0.0, 0.0)).unwrap();
        assert_relative_eq!(at0.re, 1.0 / 3.0, epsilon = 1e-15);
        let z: Complex<f64> = c(0.3, -0.2);
        let expect: Complex<f64> = (Complex::new(1.0, 0.0) + z * 3.0) / (z + 3.0);
        let got: Complex<f64> = cm.eval(z).unwrap();
        assert!((got - expect).norm() < 1e-15);
    }

    #[test]
    fn conjugating_translation() {
        // (1 + ζ)/(3 - ζ)
        let cm = conjugate_map(&MapSpec::<f64>::affine(1.0, c(1.0, 0.0)).unwrap()).unwrap();
        let z: Complex<f64> = c(-0.4, 0.5);
        let expect: Complex<f64> = (Complex::new(1.0, 0.0) + z) / (Complex::new(3.0, 0.0) - z);
        let got: Complex<f64> = cm.eval(z).unwrap();
        assert!((got - expect).norm() < 1e-15);
        assert_relative_eq!(cm.eval(c(0.0, 0.0)).unwrap().re, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn basis_values() {
        assert_relative_eq!(onb_eval(0, c::<f64>(1.0, 0.0)).re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(onb_eval(1, c::<f64>(1.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn kernel_coefficients_at_one() {
        let k = kernel_coefficients(c::<f64>(1.0, 0.0), 5).unwrap();
        assert_relative_eq!(k.coeffs[0].re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(k.coeffs[1..].iter().all(|c| c.norm() == 0.0));
        assert_relative_eq!(k.norm_sqr(), 0.5, epsilon = 1e-15);
        assert!(kernel_coefficients(c::<f64>(0.0, 1.0), 3).is_err());
    }

    #[test]
    fn julia_identity_for_dilation_at_origin() {
        let (l, r) =
            julia_identity_check(&MapSpec::affine(2.0, c(0.0, 0.0)).unwrap(), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(l, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn black_box_conjugation_is_pointwise() {
        let bb = MapSpec::BlackBox(crate::map::BlackBox::<f64>::builtin("sqrt").unwrap());
        let cm = conjugate_map(&bb).unwrap();
        assert!(!cm.exact);
        let zeta = c(0.2, 0.1);
        let direct = inverse_cayley(cayley(zeta).unwrap().sqrt()).unwrap();
        assert!((cm.eval(zeta).unwrap() - direct).norm() < 1e-15);
    }

    #[test]
    fn serializes_with_source_annotation() {
        let cm = conjugate_map(&MapSpec::affine(2.0, c(0.0, 0.0)).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&cm).unwrap();
        assert_eq!(v["type"], "mobius");
        assert_eq!(v["conjugated_from"]["type"], "affine");
        let back: ConjugatedMap<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, cm);
    }
}
