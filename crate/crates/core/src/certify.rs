//! Certification that a map sends the right half-plane into itself.
//!
//! Rational maps are decided from their coefficients: no poles in the open
//! half-plane, simple boundary poles with positive residue, at most linear
//! growth at infinity with positive leading coefficient, and a nonnegative
//! boundary real part `Re φ(iy)`. The last condition reduces to a real
//! polynomial and is decided by Sturm root isolation. Together these give
//! `Re φ >= 0` through the Nevanlinna representation of `φ`.

use num_complex::Complex;
use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::map::MapSpec;
use crate::poly::Poly;
use crate::scalar::{from_usize, lit, Real};
use crate::sturm::{check_nonnegative, RealPoly, SignCheck};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub enum SelfMapVerdict<T: Real> {
    CertifiedSelfMap,
    /// `Re witness > 0` but `Re image <= 0`.
    NotSelfMap {
        witness: Complex<T>,
        image: Complex<T>,
    },
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertMethod {
    #[serde(rename = "exact-rational")]
    ExactRational,
    #[serde(rename = "exact-affine")]
    ExactAffine,
    #[serde(rename = "sampled")]
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub struct SelfMapCertificate<T: Real> {
    pub verdict: SelfMapVerdict<T>,
    pub method: CertMethod,
    pub samples_used: usize,
}

impl<T: Real> SelfMapCertificate<T> {
    pub fn is_certified(&self) -> bool {
        self.verdict == SelfMapVerdict::CertifiedSelfMap
    }

    pub fn is_violation(&self) -> bool {
        matches!(self.verdict, SelfMapVerdict::NotSelfMap { .. })
    }
}

/// Log-polar sampling grid of the half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid<T> {
    pub radii: Vec<T>,
    pub angles: Vec<T>,
}

impl<T: Real> Default for SamplingGrid<T> {
    /// Radii `10^k` for `k = -2..=6` and 33 angles strictly inside `(-π/2, π/2)`.
    fn default() -> Self {
        SamplingGrid {
            radii: (-2..=6).map(|k| lit::<T>(10.0).powi(k)).collect(),
            angles: open_angles(33),
        }
    }
}

impl<T: Real> SamplingGrid<T> {
    pub fn points(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        self.radii.iter().flat_map(move |&r| {
            self.angles
                .iter()
                .map(move |&theta| Complex::from_polar(r, theta))
        })
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `n` equally spaced angles strictly inside `(-π/2, π/2)`.
pub fn open_angles<T: Real>(n: usize) -> Vec<T> {
    let step = T::PI() / from_usize::<T>(n + 1);
    (1..=n)
        .map(|j| -T::FRAC_PI_2() + step * from_usize::<T>(j))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyConfig<T> {
    pub grid: SamplingGrid<T>,
    /// Relative tolerance for root classification (boundary vs interior).
    pub root_tol: T,
}

impl<T: Real> Default for CertifyConfig<T> {
    fn default() -> Self {
        CertifyConfig {
            grid: SamplingGrid::default(),
            root_tol: lit(1.0e-9),
        }
    }
}

fn violates<T: Real>(spec: &MapSpec<T>, z: Complex<T>) -> Option<Complex<T>> {
    if !(z.re > T::zero()) {
        return None;
    }
    match spec.evaluate(z) {
        Ok(w) if w.re <= T::zero() => Some(w),
        _ => None,
    }
}

fn not_self_map<T: Real>(witness: Complex<T>, image: Complex<T>) -> SelfMapVerdict<T> {
    SelfMapVerdict::NotSelfMap { witness, image }
}

/// Scans the grid for a point with `Re φ(z) <= 0`.
pub fn grid_violation<T: Real>(
    spec: &MapSpec<T>,
    grid: &SamplingGrid<T>,
) -> Option<(Complex<T>, Complex<T>)> {
    grid.points()
        .find_map(|z| violates(spec, z).map(|w| (z, w)))
}

/// Decides whether `spec` maps the right half-plane into itself.
pub fn certify_self_map<T: Real>(
    spec: &MapSpec<T>,
    config: &CertifyConfig<T>,
) -> Result<SelfMapCertificate<T>> {
    spec.validate()?;
    let samples = config.grid.len();
    if let MapSpec::Affine { .. } = spec {
        return Ok(SelfMapCertificate {
            verdict: SelfMapVerdict::CertifiedSelfMap,
            method: CertMethod::ExactAffine,
            samples_used: 0,
        });
    }
    if let MapSpec::Compose(maps) = spec {
        if maps.iter().all(|m| matches!(m, MapSpec::Affine { .. })) {
            return Ok(SelfMapCertificate {
                verdict: SelfMapVerdict::CertifiedSelfMap,
                method: CertMethod::ExactAffine,
                samples_used: 0,
            });
        }
    }
    let Some((num, den)) = spec.to_rational() else {
        let verdict = match grid_violation(spec, &config.grid) {
            Some((z, w)) => not_self_map(z, w),
            None => SelfMapVerdict::Unknown,
        };
        return Ok(SelfMapCertificate {
            verdict,
            method: CertMethod::Sampled,
            samples_used: samples,
        });
    };
    if den.is_zero() {
        return Err(HardyError::DegenerateSpec(
            "denominator vanishes identically".into(),
        ));
    }
    let mut verdict = certify_rational(spec, num, den, config);
    if verdict == SelfMapVerdict::CertifiedSelfMap {
        if let Some((z, w)) = grid_violation(spec, &config.grid) {
            verdict = not_self_map(z, w);
        }
    }
    Ok(SelfMapCertificate {
        verdict,
        method: CertMethod::ExactRational,
        samples_used: samples,
    })
}

fn certify_rational<T: Real>(
    spec: &MapSpec<T>,
    num: Poly<T>,
    den: Poly<T>,
    config: &CertifyConfig<T>,
) -> SelfMapVerdict<T> {
    let tol = config.root_tol;
    let unknown_or = |found: Option<(Complex<T>, Complex<T>)>| match found {
        Some((z, w)) => not_self_map(z, w),
        None => SelfMapVerdict::Unknown,
    };
    let one = Complex::new(T::one(), T::zero());
    if num.is_zero() {
        return not_self_map(one, Complex::zero());
    }

    let (num, den) = cancel_common_roots(num, den, tol);

    // Growth at infinity.
    let dn = num.degree().unwrap_or(0);
    let dd = den.degree().unwrap_or(0);
    if dn > dd + 1 {
        return unknown_or(search_far(spec, &config.grid));
    }
    if dn == dd + 1 {
        let lead = num.leading().unwrap() / den.leading().unwrap();
        if !(lead.re > T::zero()) || lead.im.abs() > tol * lead.norm() {
            return unknown_or(search_far(spec, &config.grid));
        }
    }

    // Poles.
    let roots = den.roots();
    let dden = den.derivative();
    for (i, &r) in roots.iter().enumerate() {
        let scale = T::one().max(r.norm());
        if r.re > tol * scale {
            return unknown_or(search_near(spec, r, r.norm() * lit(1e-3) + lit(1e-6), true));
        }
        if r.re.abs() <= tol * scale {
            let r_axis = Complex::new(T::zero(), r.im);
            let repeated = roots
                .iter()
                .enumerate()
                .any(|(j, &s)| j != i && (s - r).norm() <= lit::<T>(1e-6) * scale);
            let residue = num.eval(r_axis) / dden.eval(r_axis);
            let positive = residue.re > T::zero() && residue.im.abs() <= lit::<T>(1e-7) * residue.norm();
            if repeated || !positive {
                return unknown_or(search_near(spec, r_axis, lit(1e-2), false));
            }
        }
    }

    // Boundary real part: Re(P(iy) conj Q(iy)) >= 0 for all real y.
    let p_axis = num.on_imaginary_axis();
    let q_axis = den.on_imaginary_axis();
    let boundary = p_axis.mul(&q_axis.conj_coeffs());
    let real_part = RealPoly::new(boundary.real_parts(), T::epsilon() * lit(64.0));
    if let SignCheck::NegativeAt(y) = check_nonnegative(&real_part) {
        return unknown_or(search_above(spec, y));
    }

    match violates(spec, one) {
        Some(w) => not_self_map(one, w),
        None => SelfMapVerdict::CertifiedSelfMap,
    }
}

/// Removes roots shared by numerator and denominator.
fn cancel_common_roots<T: Real>(mut num: Poly<T>, mut den: Poly<T>, tol: T) -> (Poly<T>, Poly<T>) {
    for r in den.roots() {
        let scale = num.eval_abs(r).max(T::min_positive_value());
        if num.eval(r).norm() <= tol * scale && num.degree().unwrap_or(0) >= 1 {
            num = num.deflate(r);
            den = den.deflate(r);
        }
    }
    (num, den)
}

/// Points `x + iy` with `x = 1/2, 1/4, ...` above a boundary point where the
/// real part is negative.
fn search_above<T: Real>(spec: &MapSpec<T>, y: T) -> Option<(Complex<T>, Complex<T>)> {
    let mut x = lit::<T>(0.5);
    for _ in 0..60 {
        let z = Complex::new(x, y);
        if let Some(w) = violates(spec, z) {
            return Some((z, w));
        }
        x = x * lit(0.5);
    }
    None
}

/// Small circles (or right half-circles) around `center`.
fn search_near<T: Real>(
    spec: &MapSpec<T>,
    center: Complex<T>,
    start: T,
    full_circle: bool,
) -> Option<(Complex<T>, Complex<T>)> {
    let angles: Vec<T> = if full_circle {
        (0..64).map(|k| T::TAU() * from_usize::<T>(k) / lit(64.0)).collect()
    } else {
        open_angles::<T>(65)
    };
    let mut eps = start;
    for _ in 0..12 {
        for &theta in &angles {
            let z = center + Complex::from_polar(eps, theta);
            if let Some(w) = violates(spec, z) {
                return Some((z, w));
            }
        }
        eps = eps * lit(0.1);
    }
    None
}

/// The sampling grid, then rays out to `10^12`.
fn search_far<T: Real>(
    spec: &MapSpec<T>,
    grid: &SamplingGrid<T>,
) -> Option<(Complex<T>, Complex<T>)> {
    grid_violation(spec, grid).or_else(|| {
        let far = SamplingGrid {
            radii: (7..=12).map(|k| lit::<T>(10.0).powi(k)).collect(),
            angles: open_angles(65),
        };
        grid_violation(spec, &far)
    })
}
