//! Truncated matrix models of `C_φ`.
//!
//! Under the unitary `U` that sends `e_n` to `ζⁿ`, `C_φ` becomes the
//! weighted composition operator `W g = w · (g ∘ ψ)` on the disk, with
//! `w = (1 - ψ)/(1 - ζ)`. Column `n` of the truncation holds the first `N`
//! Taylor coefficients of `w ψⁿ`, obtained by sampling on `|ζ| = ρ` and
//! inverting with an FFT.

use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::angular::{exact_lambda_rational, limsup_along_paths, ratio, sup_over_grid, AngularConfig};
use crate::cayley::{conjugate_map, kernel_coefficients, ConjugatedMap};
use crate::error::{HardyError, Result};
use crate::extended::Extended;
use crate::linalg::{largest_singular_value_with, vec_norm, CMatrix};
use crate::map::MapSpec;
use crate::scalar::{from_usize, is_finite_c, lit, Real};

pub const DEFAULT_LADDER: [usize; 6] = [16, 32, 64, 128, 256, 512];

/// Trailing-coefficient level (relative to the column norm) above which a
/// truncation is flagged.
pub const ALIASING_THRESHOLD: f64 = 1e-8;

/// `w(ζ) = (1 - ψ(ζ))/(1 - ζ)`.
pub fn weight_function<T: Real>(phi: &MapSpec<T>, zeta: Complex<T>) -> Result<Complex<T>> {
    let psi = conjugate_map(phi)?;
    weight_with(&psi, zeta)
}

fn weight_with<T: Real>(psi: &ConjugatedMap<T>, zeta: Complex<T>) -> Result<Complex<T>> {
    if !(zeta.norm() < T::one()) {
        return Err(HardyError::DomainError(format!("|ζ| = {} is not below 1", zeta.norm())));
    }
    let one = Complex::new(T::one(), T::zero());
    let s = psi.eval(zeta)?;
    let w = (one - s) / (one - zeta);
    if !is_finite_c(w) {
        return Err(HardyError::pole(zeta));
    }
    Ok(w)
}

/// The default extraction radius for `N` coefficients: `0.75`, raised so
/// that the amplification `ρ^{-(N-1)}` of the last coefficient stays below
/// `10⁴`.
pub fn default_radius<T: Real>(n: usize) -> T {
    let base = lit::<T>(0.75);
    if n <= 1 {
        return base;
    }
    base.max(lit::<T>(1e-4).powf(T::one() / from_usize(n)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorConfig<T> {
    /// Extraction radius; `None` uses [`default_radius`].
    pub radius: Option<T>,
    /// Samples per coefficient on the circle.
    pub oversampling: usize,
    pub power_tol: T,
    pub max_iter: usize,
    pub parallel: bool,
}

impl<T: Real> Default for OperatorConfig<T> {
    fn default() -> Self {
        OperatorConfig {
            radius: None,
            oversampling: 4,
            power_tol: lit(1e-12),
            max_iter: 5000,
            parallel: true,
        }
    }
}

/// `N × N` section of the disk model, `entries[(m, n)] = ⟨W ζⁿ, ζᵐ⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub struct TruncatedOperator<T: Real> {
    pub n: usize,
    pub entries: CMatrix<T>,
    pub source: MapSpec<T>,
    pub coefficient_radius: T,
    /// Largest trailing sample coefficient, amplified to the scale of the
    /// last retained coefficient, relative to the largest column norm.
    pub aliasing_indicator: T,
    pub aliasing_warning: bool,
}

impl<T: Real> TruncatedOperator<T> {
    /// Row-major CSV; each cell is a quoted `re,im` pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let row = self.entries.row(i);
            for (j, c) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "\"{:e},{:e}\"", c.re, c.im);
            }
            out.push('\n');
        }
        out
    }

    /// `M x`.
    pub fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.entries.mul_vec(x)
    }

    /// `M* x`.
    pub fn apply_adjoint(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.entries.adjoint_mul_vec(x)
    }
}

pub fn build_truncated_matrix<T: Real>(phi: &MapSpec<T>, n: usize, radius: T) -> Result<TruncatedOperator<T>> {
    build_with(
        phi,
        n,
        &OperatorConfig {
            radius: Some(radius),
            ..OperatorConfig::default()
        },
    )
}

pub fn build_with<T: Real>(phi: &MapSpec<T>, n: usize, config: &OperatorConfig<T>) -> Result<TruncatedOperator<T>> {
    if n == 0 {
        return Err(HardyError::DegenerateSpec("truncation size must be positive".into()));
    }
    let rho = config.radius.unwrap_or_else(|| default_radius(n));
    if !(rho > T::zero() && rho < T::one()) {
        return Err(HardyError::DegenerateSpec(format!("radius {rho} is outside (0, 1)")));
    }
    if config.oversampling < 2 {
        return Err(HardyError::DegenerateSpec("oversampling must be at least 2".into()));
    }
    let psi = conjugate_map(phi)?;
    let m = config.oversampling * n;
    let step = T::TAU() / from_usize(m);
    let mut psi_vals = Vec::with_capacity(m);
    let mut w_vals = Vec::with_capacity(m);
    for j in 0..m {
        let zeta = Complex::from_polar(rho, step * from_usize(j));
        let s = psi.eval(zeta)?;
        if !is_finite_c(s) {
            return Err(HardyError::pole(zeta));
        }
        psi_vals.push(s);
        w_vals.push(weight_with(&psi, zeta)?);
    }
    let fft = FftPlanner::<T>::new().plan_fft_forward(m);
    let scale: Vec<T> = (0..m)
        .map(|k| T::one() / (from_usize::<T>(m) * rho.powi(k as i32)))
        .collect();
    let tail_start = m - n.min(m / 4).max(1);
    let amplification = rho.powi(-(n as i32 - 1));

    let column = |col: usize| -> (Vec<Complex<T>>, T) {
        let mut buf: Vec<Complex<T>> = w_vals
            .iter()
            .zip(&psi_vals)
            .map(|(&w, &s)| w * s.powu(col as u32))
            .collect();
        fft.process(&mut buf);
        let trailing = buf[tail_start..]
            .iter()
            .fold(T::zero(), |a, c| a.max(c.norm() / from_usize::<T>(m)));
        let coeffs: Vec<Complex<T>> = buf[..n].iter().zip(&scale).map(|(&c, &s)| c * s).collect();
        (coeffs, trailing * amplification)
    };
    let columns: Vec<(Vec<Complex<T>>, T)> = if config.parallel {
        (0..n).into_par_iter().map(column).collect()
    } else {
        (0..n).map(column).collect()
    };
    let scale = columns.iter().fold(T::zero(), |a, (c, _)| a.max(vec_norm(c)));
    let trailing = columns.iter().fold(T::zero(), |a, (_, t)| a.max(*t));
    let aliasing_indicator = if scale > T::zero() { trailing / scale } else { T::zero() };
    let cols: Vec<Vec<Complex<T>>> = columns.into_iter().map(|(c, _)| c).collect();
    if cols.iter().flatten().any(|c| !is_finite_c(*c)) {
        return Err(HardyError::DegenerateSpec(
            "non-finite Taylor coefficients; the map may not be bounded-inducing".into(),
        ));
    }
    Ok(TruncatedOperator {
        n,
        entries: CMatrix::from_columns(&cols),
        source: phi.clone(),
        coefficient_radius: rho,
        aliasing_indicator,
        aliasing_warning: aliasing_indicator > lit(ALIASING_THRESHOLD),
    })
}

/// One rung of the truncation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSample<T> {
    pub n: usize,
    pub sigma: T,
    pub converged: bool,
    pub aliasing_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate<T> {
    pub per_n: Vec<NormSample<T>>,
    /// The value at the largest truncation.
    pub extrapolated: T,
    /// `√λ` when `λ` is known exactly.
    pub reference: Option<T>,
}

pub fn largest_singular_value_of<T: Real>(op: &TruncatedOperator<T>, tol: T, max_iter: usize) -> (T, bool) {
    let p = largest_singular_value_with(op.n, |x| op.apply(x), |y| op.apply_adjoint(y), tol, max_iter);
    (p.sigma, p.converged)
}

pub fn operator_norm_estimate<T: Real>(phi: &MapSpec<T>, ladder: &[usize]) -> Result<NormEstimate<T>> {
    operator_norm_estimate_with(phi, ladder, &OperatorConfig::default())
}

pub fn operator_norm_estimate_with<T: Real>(
    phi: &MapSpec<T>,
    ladder: &[usize],
    config: &OperatorConfig<T>,
) -> Result<NormEstimate<T>> {
    if ladder.is_empty() {
        return Err(HardyError::DegenerateSpec("empty truncation ladder".into()));
    }
    let mut per_n = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let op = build_with(phi, n, config)?;
        let (sigma, converged) = largest_singular_value_of(&op, config.power_tol, config.max_iter);
        per_n.push(NormSample {
            n,
            sigma,
            converged,
            aliasing_warning: op.aliasing_warning,
        });
    }
    let reference = match exact_lambda_rational(phi) {
        Ok(Extended::Finite(l)) => Some(l.sqrt()),
        _ => None,
    };
    Ok(NormEstimate {
        extrapolated: per_n.last().map(|s| s.sigma).unwrap_or_else(T::nan),
        per_n,
        reference,
    })
}

/// `‖M* c(w) - c(φ(w))‖ / ‖c(φ(w))‖` for the kernel coefficient vectors.
pub fn adjoint_kernel_check<T: Real>(phi: &MapSpec<T>, w: Complex<T>, n: usize) -> Result<T> {
    let op = build_with(phi, n, &OperatorConfig::default())?;
    adjoint_kernel_residual(&op, w)
}

/// [`adjoint_kernel_check`] against an already assembled truncation.
pub fn adjoint_kernel_residual<T: Real>(op: &TruncatedOperator<T>, w: Complex<T>) -> Result<T> {
    let image = op.source.evaluate(w)?;
    let cw = kernel_coefficients(w, op.n)?;
    let cphi = kernel_coefficients(image, op.n)?;
    let lhs = op.apply_adjoint(&cw.coeffs);
    let diff: Vec<Complex<T>> = lhs.iter().zip(&cphi.coeffs).map(|(a, b)| a - b).collect();
    Ok(vec_norm(&diff) / vec_norm(&cphi.coeffs))
}

/// `‖C_φ* k_z‖ / ‖k_z‖ = √(Re z / Re φ(z))`.
pub fn kernel_ratio<T: Real>(phi: &MapSpec<T>, z: Complex<T>) -> Result<T> {
    ratio(phi, z).map(|r| r.sqrt())
}

/// Largest kernel ratio over the grid (with ray refinement) and the
/// nontangential path samples.
pub fn kernel_ratio_sup<T: Real>(phi: &MapSpec<T>, config: &AngularConfig<T>) -> Result<(T, Complex<T>)> {
    let mut best = sup_over_grid(|z| kernel_ratio(phi, z), &config.grid, config.refine_iterations)?;
    for path in config.paths() {
        for z in path.points() {
            let v = kernel_ratio(phi, z)?;
            if v > best.0 {
                best = (v, z);
            }
        }
    }
    Ok(best)
}

/// `√(lim sup Re z / Re φ(z))` along nontangential paths. The normalized
/// kernels tend weakly to zero, so this bounds the essential norm below.
pub fn essential_norm_lower_bound<T: Real>(phi: &MapSpec<T>, config: &AngularConfig<T>) -> Result<Extended<T>> {
    let l = limsup_along_paths(|z| ratio(phi, z), config)?;
    Ok(match l {
        Extended::Finite(v) => Extended::Finite(v.sqrt()),
        Extended::Infinite => Extended::Infinite,
    })
}

/// `‖M_Nⁿ‖^{1/n}` for `n = 1..=n_max`.
pub fn gelfand_diagnostic<T: Real>(phi: &MapSpec<T>, n: usize, n_max: usize) -> Result<Vec<T>> {
    let op = build_with(phi, n, &OperatorConfig::default())?;
    Ok(gelfand_sequence(&op, n_max, lit(1e-10), 2000))
}

pub fn gelfand_sequence<T: Real>(op: &TruncatedOperator<T>, n_max: usize, tol: T, max_iter: usize) -> Vec<T> {
    (1..=n_max)
        .map(|k| {
            let apply = |x: &[Complex<T>]| (0..k).fold(x.to_vec(), |v, _| op.apply(&v));
            let apply_adj = |x: &[Complex<T>]| (0..k).fold(x.to_vec(), |v, _| op.apply_adjoint(&v));
            let p = largest_singular_value_with(op.n, apply, apply_adj, tol, max_iter);
            p.sigma.powf(T::one() / from_usize(k))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use approx::assert_relative_eq;

    fn dil(a: f64) -> MapSpec<f64> {
        MapSpec::affine(a, c(0.0, 0.0)).unwrap()
    }

    #[test]
    fn weights() {
        let id = MapSpec::<f64>::identity();
        assert_relative_eq!(weight_function(&id, c(0.3, 0.2)).unwrap().re, 1.0, epsilon = 1e-15);
        let w = weight_function(&dil(2.0), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(w.re, 2.0 / 3.0, epsilon = 1e-15);
        let near = weight_function(&dil(2.0), c(0.999_999, 0.0)).unwrap();
        assert_relative_eq!(near.re, 0.5, epsilon = 1e-6);
        assert!(weight_function(&dil(2.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn radius_policy() {
        assert_eq!(default_radius::<f64>(16), 0.75);
        let r = default_radius::<f64>(512);
        assert!(r > 0.98 && r < 1.0);
        assert_relative_eq!(r.powi(-511), 1e4, max_relative = 0.02);
    }

    #[test]
    fn identity_matrix() {
        let op = build_truncated_matrix(&MapSpec::<f64>::identity(), 32, 0.75).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((op.entries[(i, j)] - c(expected, 0.0)).norm() < 1e-12);
            }
        }
        assert!(!op.aliasing_warning);
    }

    #[test]
    fn first_columns_are_geometric() {
        let op = build_truncated_matrix(&dil(2.0), 32, 0.75).unwrap();
        for m in 0..32 {
            let expected = 2.0 / 3.0 * (-1.0f64 / 3.0).powi(m as i32);
            assert!((op.entries[(m, 0)].re - expected).abs() < 1e-11, "{m}");
        }
        let shift = MapSpec::affine(1.0, c(1.0, 0.0)).unwrap();
        let op = build_truncated_matrix(&shift, 32, 0.75).unwrap();
        for m in 0..32 {
            let expected = 2.0 / 3.0 * (1.0f64 / 3.0).powi(m as i32);
            assert!((op.entries[(m, 0)].re - expected).abs() < 1e-11, "{m}");
        }
    }

    #[test]
    fn radius_invariance() {
        for phi in [dil(2.0), MapSpec::affine(1.0, c(1.0, 0.0)).unwrap()] {
            let a = build_truncated_matrix(&phi, 16, 0.5).unwrap();
            let b = build_truncated_matrix(&phi, 16, 0.9).unwrap();
            let scale = a.entries.max_abs();
            for (x, y) in a.entries.as_slice().iter().zip(b.entries.as_slice()) {
                assert!((x - y).norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn aliasing_is_flagged() {
        let phi = MapSpec::rational_real(&[1.0, 0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert!(build_truncated_matrix(&phi, 16, 0.9).unwrap().aliasing_warning);
        assert!(!build_with(&phi, 64, &OperatorConfig::default()).unwrap().aliasing_warning);
    }

    #[test]
    fn parallel_and_serial_agree() {
        let phi = MapSpec::affine(0.5, c(1.0, 0.5)).unwrap();
        let serial = OperatorConfig {
            parallel: false,
            ..OperatorConfig::default()
        };
        let a = build_with(&phi, 64, &serial).unwrap();
        let b = build_with(&phi, 64, &OperatorConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn norm_estimates_stay_below_the_norm() {
        let est = operator_norm_estimate(&dil(2.0), &[16, 64, 128]).unwrap();
        let reference = est.reference.unwrap();
        assert_relative_eq!(reference, 0.5f64.sqrt(), epsilon = 1e-15);
        for s in &est.per_n {
            assert!(s.sigma <= reference + 1e-9, "{s:?}");
        }
        assert!(est.extrapolated >= 0.9 * reference);
        let id = operator_norm_estimate(&MapSpec::<f64>::identity(), &[8, 16]).unwrap();
        for s in id.per_n {
            assert_relative_eq!(s.sigma, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn adjoint_on_kernels() {
        let id = MapSpec::<f64>::identity();
        assert!(adjoint_kernel_check(&id, c(0.7, 1.3), 64).unwrap() <= 1e-12);
        assert!(adjoint_kernel_check(&dil(2.0), c(1.0, 0.0), 128).unwrap() <= 1e-6);
    }

    #[test]
    fn kernel_ratios() {
        assert_relative_eq!(kernel_ratio(&dil(2.0), c(3.0, -7.0)).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        let shift = MapSpec::affine(1.0, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(kernel_ratio(&shift, c(1.0, 0.0)).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        let zinv = MapSpec::rational_real(&[1.0, 0.0, 1.0], &[0.0, 1.0]).unwrap();
        let (sup, _) = kernel_ratio_sup(&zinv, &AngularConfig::default()).unwrap();
        assert!(sup <= 1.0 + 1e-9 && sup > 0.999);
        let lb = essential_norm_lower_bound(&zinv, &AngularConfig::default()).unwrap();
        assert_relative_eq!(lb.finite().unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn gelfand() {
        let seq = gelfand_diagnostic(&MapSpec::<f64>::identity(), 16, 4).unwrap();
        for v in seq {
            assert_relative_eq!(v, 1.0, epsilon = 1e-9);
        }
        let seq = gelfand_diagnostic(&dil(2.0), 64, 5).unwrap();
        assert!(seq.iter().all(|v| *v <= 0.5f64.sqrt() + 1e-9));
    }

    #[test]
    fn csv_export() {
        let op = build_truncated_matrix(&MapSpec::<f64>::identity(), 2, 0.5).unwrap();
        let csv = op.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("\"1e0,"));
        assert_eq!(lines[0].matches('"').count(), 4);
    }
}
