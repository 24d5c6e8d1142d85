//! Angular derivative at infinity and the boundedness decision.
//!
//! For a self-map `φ` of the half-plane the angular derivative
//! `λ = φ'(∞)` is the nontangential limit of `z/φ(z)`. It coincides with
//! `sup Re z / Re φ(z)`, with the corresponding lim sup at infinity, and
//! with the radial limit of `(1 - ψ(r))/(1 - r)` for the Cayley-conjugated
//! disk map `ψ`. The composition operator is bounded iff `λ < ∞`, and then
//! its norm, essential norm and spectral radius all equal `√λ`.

use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cayley::{cayley, conjugate_map, inverse_cayley, julia_identity_with, ConjugatedMap};
use crate::certify::{certify_self_map, CertifyConfig, SamplingGrid, SelfMapCertificate};
use crate::error::{HardyError, Result};
use crate::extended::Extended;
use crate::map::{iterate_map, MapSpec};
use crate::scalar::{lit, rel_gap, Real};

/// Points `r_k e^{iθ}` with fixed `|θ| < π/2`, so `|Im z|/Re z` is bounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub struct NontangentialPath<T: Real> {
    pub angle: T,
    pub radii: Vec<T>,
}

impl<T: Real> NontangentialPath<T> {
    pub fn new(angle: T, radii: Vec<T>) -> Result<Self> {
        if !(angle.abs() < T::FRAC_PI_2()) {
            return Err(HardyError::DomainError(format!(
                "path angle {angle} is not nontangential"
            )));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.first().is_some_and(|r| !(*r > T::zero())) {
            return Err(HardyError::DomainError(
                "path radii must be positive and increasing".into(),
            ));
        }
        Ok(NontangentialPath { angle, radii })
    }

    /// Radii `2^k`, `k = 0..=max_exp`.
    pub fn dyadic(angle: T, max_exp: i32) -> Self {
        NontangentialPath {
            angle,
            radii: (0..=max_exp).map(|k| lit::<T>(2.0).powi(k)).collect(),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        self.radii
            .iter()
            .map(move |&r| Complex::from_polar(r, self.angle))
    }

    /// `|tan θ|`, the constant `|Im z| / Re z` along the path.
    pub fn aperture(&self) -> T {
        self.angle.tan().abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularConfig<T> {
    pub path_angles: Vec<T>,
    /// Paths use radii `2^k` for `k = 0..=max_exponent`.
    pub max_exponent: i32,
    pub grid: SamplingGrid<T>,
    /// Number of tail values inspected for limits and divergence.
    pub tail: usize,
    /// Tail values above this (and increasing) count as divergent.
    pub divergence_threshold: T,
    /// Log-log growth rate of an increasing tail that counts as divergent.
    pub divergence_slope: T,
    /// Relative disagreement between the numeric estimates that makes a
    /// black-box result inconclusive.
    pub agreement_tol: T,
    pub refine_iterations: usize,
}

impl<T: Real> Default for AngularConfig<T> {
    fn default() -> Self {
        AngularConfig {
            path_angles: vec![T::zero(), T::FRAC_PI_4(), -T::FRAC_PI_4()],
            max_exponent: 27,
            grid: SamplingGrid::default(),
            tail: 5,
            divergence_threshold: lit(1e6),
            divergence_slope: lit(0.25),
            agreement_tol: lit(1e-2),
            refine_iterations: 80,
        }
    }
}

impl<T: Real> AngularConfig<T> {
    pub fn paths(&self) -> Vec<NontangentialPath<T>> {
        self.path_angles
            .iter()
            .map(|&a| NontangentialPath::dyadic(a, self.max_exponent))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaMethod {
    #[serde(rename = "exact-rational")]
    ExactRational,
    #[serde(rename = "numeric")]
    Numeric,
}

/// The Julia-Carathéodory quantities for `φ` at infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub struct AngularDerivativeReport<T: Real> {
    pub fixes_infinity: bool,
    pub lambda: Extended<T>,
    /// Largest sampled `Re z / Re φ(z)`.
    #[serde(with = "crate::extended::inf_as_string")]
    pub sup_ratio: T,
    /// Limit of `Re z / Re φ(z)` along nontangential paths (largest over paths).
    pub limsup_ratio: Extended<T>,
    /// Limit of `z / φ(z)` along nontangential paths.
    pub nt_limit: Extended<T>,
    /// Limit of `(1 - ψ(r)) / (1 - r)` as `r → 1⁻`.
    pub disk_quotient_limit: Extended<T>,
    pub method: LambdaMethod,
    /// Largest pairwise relative gap among the finite estimates and `lambda`.
    #[serde(with = "crate::extended::inf_as_string")]
    pub agreement_gap: T,
}

/// Evidence of unboundedness: the largest finite ratio seen and the path
/// along which divergence showed up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub struct UnboundednessWitness<T: Real> {
    pub point: Complex<T>,
    pub ratio: T,
    pub path: NontangentialPath<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnboundedReason {
    InfinityNotFixed,
    InfiniteAngularDerivative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub enum BoundednessVerdict<T: Real> {
    /// `norm`, `essential_norm` and `spectral_radius` all hold `√lambda`.
    Bounded {
        lambda: T,
        norm: T,
        essential_norm: T,
        spectral_radius: T,
    },
    Unbounded {
        reason: UnboundedReason,
        witness: UnboundednessWitness<T>,
    },
    NotSelfMap { certificate: SelfMapCertificate<T> },
}

impl<T: Real> BoundednessVerdict<T> {
    fn bounded(lambda: T) -> Self {
        let root = lambda.sqrt();
        BoundednessVerdict::Bounded {
            lambda,
            norm: root,
            essential_norm: root,
            spectral_radius: root,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, BoundednessVerdict::Bounded { .. })
    }

    pub fn lambda(&self) -> Option<T> {
        match self {
            BoundednessVerdict::Bounded { lambda, .. } => Some(*lambda),
            _ => None,
        }
    }
}

/// `Re z / Re φ(z)`.
pub fn ratio<T: Real>(phi: &MapSpec<T>, z: Complex<T>) -> Result<T> {
    if !(z.re > T::zero()) {
        return Err(HardyError::DomainError(format!("Re z = {} is not positive", z.re)));
    }
    let w = phi.evaluate(z)?;
    if !(w.re > T::zero()) {
        return Err(HardyError::violation(z, w.re));
    }
    Ok(z.re / w.re)
}

/// `φ'(∞)` from the coefficients: `lc(den)/lc(num)` when the numerator
/// degree exceeds the denominator's by one, `+∞` when `φ(∞)` is finite.
pub fn exact_lambda_rational<T: Real>(phi: &MapSpec<T>) -> Result<Extended<T>> {
    match phi {
        MapSpec::BlackBox(bb) => Err(HardyError::NotRational(bb.name().to_string())),
        MapSpec::Affine { a, .. } => Ok(Extended::Finite(T::one() / *a)),
        MapSpec::Compose(maps) => {
            // Chain rule at infinity when every factor fixes it.
            let mut product = T::one();
            let mut all_finite = true;
            for m in maps {
                match exact_lambda_rational(m) {
                    Ok(Extended::Finite(l)) => product = product * l,
                    Ok(Extended::Infinite) => all_finite = false,
                    Err(e @ HardyError::NotRational(_)) => return Err(e),
                    Err(_) => all_finite = false,
                }
            }
            if all_finite {
                return Ok(Extended::Finite(product));
            }
            let (p, q) = phi
                .to_rational()
                .ok_or_else(|| HardyError::NotRational("composition".into()))?;
            lambda_from_degrees(&p, &q)
        }
        _ => {
            let (p, q) = phi
                .to_rational()
                .ok_or_else(|| HardyError::NotRational("map".into()))?;
            lambda_from_degrees(&p, &q)
        }
    }
}

fn lambda_from_degrees<T: Real>(
    p: &crate::poly::Poly<T>,
    q: &crate::poly::Poly<T>,
) -> Result<Extended<T>> {
    let (Some(dp), Some(dq)) = (p.degree(), q.degree()) else {
        return Ok(Extended::Infinite);
    };
    if dp <= dq {
        return Ok(Extended::Infinite);
    }
    if dp > dq + 1 {
        return Err(HardyError::DomainError(format!(
            "degree {dp} over degree {dq} cannot map the half-plane into itself"
        )));
    }
    let l = q.leading().unwrap() / p.leading().unwrap();
    if !(l.re > T::zero()) || l.im.abs() > lit::<T>(1e-9) * l.norm() {
        return Err(HardyError::DomainError(format!(
            "leading ratio {l} is not a positive real"
        )));
    }
    Ok(Extended::Finite(l.re))
}

/// Limit behaviour of a sampled sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
enum SequenceLimit<T> {
    Converged(T),
    Diverged,
}

impl<T: Real> SequenceLimit<T> {
    fn extended(self) -> Extended<T> {
        match self {
            SequenceLimit::Converged(v) => Extended::from_value(v),
            SequenceLimit::Diverged => Extended::Infinite,
        }
    }
}

fn strictly_increasing<T: Real>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

/// Classifies the tail of `values` sampled at `radii`: divergent when the
/// last `tail` values increase and either exceed the threshold or grow like
/// a positive power of the radius; otherwise the limit is extrapolated.
fn sequence_limit<T: Real>(values: &[T], radii: &[T], config: &AngularConfig<T>) -> SequenceLimit<T> {
    let n = values.len();
    if n == 0 {
        return SequenceLimit::Converged(T::nan());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return SequenceLimit::Diverged;
    }
    let tail = config.tail.clamp(2, n);
    let tv = &values[n - tail..];
    let tr = &radii[n - tail..];
    if strictly_increasing(tv) {
        let last = tv[tail - 1];
        if last > config.divergence_threshold {
            return SequenceLimit::Diverged;
        }
        if tv[0] > T::zero() {
            let slope = (last / tv[0]).ln() / (tr[tail - 1] / tr[0]).ln();
            if slope >= config.divergence_slope {
                return SequenceLimit::Diverged;
            }
        }
    }
    SequenceLimit::Converged(extrapolate(values))
}

/// Aitken Δ² acceleration of the last terms, falling back to the last term
/// when the correction is not trustworthy.
pub fn extrapolate<T: Real>(values: &[T]) -> T {
    let n = values.len();
    let last = values[n - 1];
    if n < 3 {
        return last;
    }
    let (x0, x1, x2) = (values[n - 3], values[n - 2], values[n - 1]);
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let denom = d2 - d1;
    let scale = x2.abs().max(T::min_positive_value());
    if denom.abs() <= T::epsilon() * lit(64.0) * scale || d2.abs() <= T::epsilon() * lit(64.0) * scale {
        return last;
    }
    let accel = x2 - d2 * d2 / denom;
    // Only accept corrections compatible with a contracting tail.
    if accel.is_finite() && (accel - x2).abs() <= lit::<T>(4.0) * d2.abs() && d2.abs() < d1.abs() {
        accel
    } else {
        last
    }
}

/// Samples of the quantities needed along one path.
struct PathSamples<T: Real> {
    path: NontangentialPath<T>,
    points: Vec<Complex<T>>,
    ratios: Vec<T>,
    nt_values: Vec<T>,
    moduli: Vec<T>,
}

fn sample_path<T: Real>(phi: &MapSpec<T>, path: &NontangentialPath<T>) -> Result<PathSamples<T>> {
    let mut out = PathSamples {
        path: path.clone(),
        points: Vec::with_capacity(path.radii.len()),
        ratios: Vec::with_capacity(path.radii.len()),
        nt_values: Vec::with_capacity(path.radii.len()),
        moduli: Vec::with_capacity(path.radii.len()),
    };
    for z in path.points() {
        let w = phi.evaluate(z)?;
        if !(w.re > T::zero()) {
            return Err(HardyError::violation(z, w.re));
        }
        out.points.push(z);
        out.ratios.push(z.re / w.re);
        out.nt_values.push((z / w).re);
        out.moduli.push(w.norm());
    }
    Ok(out)
}

fn tends_to_infinity<T: Real>(moduli: &[T], tail: usize) -> bool {
    let n = moduli.len();
    if n < 2 {
        return false;
    }
    let tail = tail.clamp(2, n);
    strictly_increasing(&moduli[n - tail..])
        && moduli[n - 1] >= lit::<T>(10.0) * T::one().max(moduli[0])
}

/// Largest limit of `f` along the configured nontangential paths.
pub fn limsup_along_paths<T: Real>(
    f: impl Fn(Complex<T>) -> Result<T>,
    config: &AngularConfig<T>,
) -> Result<Extended<T>> {
    let mut best = Extended::Finite(T::neg_infinity());
    for path in config.paths() {
        let values = path.points().map(&f).collect::<Result<Vec<T>>>()?;
        let lim = sequence_limit(&values, &path.radii, config).extended();
        if lim > best {
            best = lim;
        }
    }
    Ok(best)
}

/// Maximizes `f` over the grid, then refines along the best ray by golden
/// section search in `log r`.
pub fn sup_over_grid<T: Real>(
    f: impl Fn(Complex<T>) -> Result<T>,
    grid: &SamplingGrid<T>,
    iterations: usize,
) -> Result<(T, Complex<T>)> {
    let mut best = (T::neg_infinity(), Complex::new(T::one(), T::zero()));
    for z in grid.points() {
        let v = f(z)?;
        if v > best.0 {
            best = (v, z);
        }
    }
    let (r0, theta) = (best.1.norm(), best.1.arg());
    let on_ray = |t: T| f(Complex::from_polar(t.exp(), theta));
    let decade = lit::<T>(10.0).ln();
    let (mut lo, mut hi) = (r0.ln() - decade, r0.ln() + decade);
    let g = lit::<T>(0.618_033_988_749_895);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (on_ray(x1)?, on_ray(x2)?);
    for _ in 0..iterations {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = on_ray(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = on_ray(x2)?;
        }
    }
    for (v, x) in [(f1, x1), (f2, x2)] {
        if v > best.0 {
            best = (v, Complex::from_polar(x.exp(), theta));
        }
    }
    Ok(best)
}

/// Full numeric analysis kept for witnesses.
struct Analysis<T: Real> {
    report: AngularDerivativeReport<T>,
    samples: Vec<PathSamples<T>>,
    sup_point: Complex<T>,
}

fn disk_quotients<T: Real>(
    phi: &MapSpec<T>,
    psi: Option<&ConjugatedMap<T>>,
    radii: &[T],
) -> Result<Vec<T>> {
    // r = τ⁻¹(x) for x on the positive axis, so r → 1⁻ as x → ∞.
    radii
        .iter()
        .map(|&x| {
            let r = inverse_cayley(Complex::new(x, T::zero()))?;
            let s = match psi {
                Some(p) => p.eval(r)?,
                None => inverse_cayley(phi.evaluate(Complex::new(x, T::zero()))?)?,
            };
            Ok(((Complex::new(T::one(), T::zero()) - s) / (T::one() - r.re)).re)
        })
        .collect()
}

fn analyze<T: Real>(phi: &MapSpec<T>, config: &AngularConfig<T>) -> Result<Analysis<T>> {
    let samples = config
        .paths()
        .iter()
        .map(|p| sample_path(phi, p))
        .collect::<Result<Vec<_>>>()?;
    let fixes_numeric = samples
        .iter()
        .all(|s| tends_to_infinity(&s.moduli, config.tail));

    let max_limit = |lims: Vec<SequenceLimit<T>>| {
        lims.into_iter()
            .map(SequenceLimit::extended)
            .fold(Extended::Finite(T::neg_infinity()), |a, b| if b > a { b } else { a })
    };
    let limsup_ratio = max_limit(
        samples
            .iter()
            .map(|s| sequence_limit(&s.ratios, &s.path.radii, config))
            .collect(),
    );
    let nt_limit = max_limit(
        samples
            .iter()
            .map(|s| sequence_limit(&s.nt_values, &s.path.radii, config))
            .collect(),
    );

    let psi = if phi.to_rational().is_some() {
        Some(conjugate_map(phi)?)
    } else {
        None
    };
    let radial = NontangentialPath::dyadic(T::zero(), config.max_exponent);
    let quotients = disk_quotients(phi, psi.as_ref(), &radial.radii)?;
    let disk_quotient_limit = sequence_limit(&quotients, &radial.radii, config).extended();

    let (grid_sup, sup_point) = sup_over_grid(|z| ratio(phi, z), &config.grid, config.refine_iterations)?;
    let path_sup = samples
        .iter()
        .flat_map(|s| s.ratios.iter().zip(&s.points))
        .fold((T::neg_infinity(), sup_point), |acc, (&v, &z)| if v > acc.0 { (v, z) } else { acc });
    let (sup_ratio, sup_point) = if path_sup.0 > grid_sup {
        path_sup
    } else {
        (grid_sup, sup_point)
    };

    let exact = match exact_lambda_rational(phi) {
        Ok(l) => Some(l),
        Err(HardyError::NotRational(_)) => None,
        Err(e) => return Err(e),
    };

    let estimates = [
        Extended::Finite(sup_ratio),
        limsup_ratio,
        nt_limit,
        disk_quotient_limit,
    ];
    let (lambda, method, fixes_infinity) = match exact {
        Some(l) => (l, LambdaMethod::ExactRational, l.is_finite()),
        None => {
            let l = if !fixes_numeric {
                Extended::Infinite
            } else {
                limsup_ratio
            };
            (l, LambdaMethod::Numeric, fixes_numeric)
        }
    };
    let agreement_gap = match lambda {
        Extended::Finite(l) => {
            let mut vals = vec![l];
            vals.extend(estimates.iter().map(|e| e.value()));
            let mut gap = T::zero();
            for i in 0..vals.len() {
                for j in (i + 1)..vals.len() {
                    let g = if vals[i].is_finite() && vals[j].is_finite() {
                        rel_gap(vals[i], vals[j])
                    } else {
                        T::infinity()
                    };
                    gap = gap.max(g);
                }
            }
            gap
        }
        Extended::Infinite => T::zero(),
    };
    Ok(Analysis {
        report: AngularDerivativeReport {
            fixes_infinity,
            lambda,
            sup_ratio,
            limsup_ratio,
            nt_limit,
            disk_quotient_limit,
            method,
            agreement_gap,
        },
        samples,
        sup_point,
    })
}

/// Estimates `λ = φ'(∞)` four ways and reconciles them. Rational maps use
/// the exact coefficient value; black boxes whose estimates disagree by
/// more than `agreement_tol` are reported as inconclusive.
pub fn estimate_lambda<T: Real>(
    phi: &MapSpec<T>,
    config: &AngularConfig<T>,
) -> Result<AngularDerivativeReport<T>> {
    let analysis = analyze(phi, config)?;
    let report = analysis.report;
    if report.method == LambdaMethod::Numeric
        && report.lambda.is_finite()
        && report.agreement_gap > config.agreement_tol
    {
        return Err(HardyError::Inconclusive {
            gap: report.agreement_gap.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(report)
}

fn witness_from<T: Real>(analysis: &Analysis<T>, reason: UnboundedReason) -> UnboundednessWitness<T> {
    // Path where divergence is visible: |φ| not growing, or the largest ratio.
    let pick = match reason {
        UnboundedReason::InfinityNotFixed => analysis
            .samples
            .iter()
            .find(|s| !tends_to_infinity(&s.moduli, 5))
            .unwrap_or(&analysis.samples[0]),
        UnboundedReason::InfiniteAngularDerivative => analysis
            .samples
            .iter()
            .max_by(|a, b| {
                let la = a.ratios.last().copied().unwrap_or(T::zero());
                let lb = b.ratios.last().copied().unwrap_or(T::zero());
                la.partial_cmp(&lb).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(&analysis.samples[0]),
    };
    let (ratio, point) = pick
        .ratios
        .iter()
        .zip(&pick.points)
        .filter(|(v, _)| v.is_finite())
        .fold((T::neg_infinity(), analysis.sup_point), |acc, (&v, &z)| {
            if v > acc.0 {
                (v, z)
            } else {
                acc
            }
        });
    UnboundednessWitness {
        point,
        ratio,
        path: pick.path.clone(),
    }
}

/// Bounded iff `φ` fixes infinity with a finite angular derivative.
pub fn decide_boundedness<T: Real>(
    phi: &MapSpec<T>,
    certify: &CertifyConfig<T>,
    config: &AngularConfig<T>,
) -> Result<BoundednessVerdict<T>> {
    let certificate = certify_self_map(phi, certify)?;
    if certificate.is_violation() {
        return Ok(BoundednessVerdict::NotSelfMap { certificate });
    }
    decide_for_self_map(phi, config).map(|(verdict, _)| verdict)
}

/// The decision for a map already known (or assumed) to be a self-map,
/// along with the report it was derived from.
pub fn decide_for_self_map<T: Real>(
    phi: &MapSpec<T>,
    config: &AngularConfig<T>,
) -> Result<(BoundednessVerdict<T>, AngularDerivativeReport<T>)> {
    let analysis = analyze(phi, config)?;
    let report = analysis.report.clone();
    let verdict = match report.lambda {
        Extended::Finite(l) => {
            if report.method == LambdaMethod::Numeric && report.agreement_gap > config.agreement_tol {
                return Err(HardyError::Inconclusive {
                    gap: report.agreement_gap.to_f64().unwrap_or(f64::NAN),
                });
            }
            BoundednessVerdict::bounded(l)
        }
        Extended::Infinite => {
            let reason = if report.fixes_infinity {
                UnboundedReason::InfiniteAngularDerivative
            } else {
                UnboundedReason::InfinityNotFixed
            };
            BoundednessVerdict::Unbounded {
                reason,
                witness: witness_from(&analysis, reason),
            }
        }
    };
    Ok((verdict, report))
}

/// Norm, essential norm, spectral radius and `Hᵖ` norm of `C_φ` from `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorInvariants<T> {
    pub norm: T,
    pub essential_norm: T,
    pub spectral_radius: T,
    pub p: T,
    pub hp_norm: T,
}

pub fn invariants_from_lambda<T: Real>(lambda: T, p: T) -> Result<OperatorInvariants<T>> {
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(HardyError::DomainError(format!("λ = {lambda} must be finite and positive")));
    }
    if !(p > T::zero() && p.is_finite()) {
        return Err(HardyError::DomainError(format!("p = {p} must be positive")));
    }
    let root = lambda.sqrt();
    Ok(OperatorInvariants {
        norm: root,
        essential_norm: root,
        spectral_radius: root,
        p,
        hp_norm: lambda.powf(T::one() / p),
    })
}

/// `(λ(φₙ), λ(φ)ⁿ)` from the coefficients of the iterate and of `φ`.
pub fn iterate_lambda_check<T: Real>(phi: &MapSpec<T>, n: usize) -> Result<(T, T)> {
    let base = exact_lambda_rational(phi)?;
    let iterated = exact_lambda_rational(&iterate_map(phi, n))?;
    match (iterated, base) {
        (Extended::Finite(a), Extended::Finite(b)) => Ok((a, b.powi(n as i32))),
        _ => Err(HardyError::DomainError(
            "angular derivative at infinity is not finite".into(),
        )),
    }
}

/// One radius of a Julia inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JuliaSample<T> {
    pub r: T,
    /// `|1 - ψ(r)|² / |1 - r|²`.
    pub lhs: T,
    /// `(1 - |ψ(r)|²) / (1 - r²)`.
    pub rhs: T,
    /// `lhs / rhs`, which equals `Re z / Re φ(z)` at `z = τ(r)`.
    pub quotient_ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub struct JuliaInequalityReport<T: Real> {
    pub lambda: Extended<T>,
    /// `M = λ (1 + margin)`.
    pub bound: Extended<T>,
    pub samples: Vec<JuliaSample<T>>,
    pub max_quotient_ratio: T,
    pub holds: bool,
}

/// Checks `|1 - ψ(r)|²/|1 - r|² ≤ M (1 - |ψ(r)|²)/(1 - r²)` with
/// `M = λ (1 + margin)`. An infinite `λ` never passes: no finite `M` is
/// available.
pub fn julia_inequality_check<T: Real>(
    phi: &MapSpec<T>,
    r_values: &[T],
    margin: T,
    config: &AngularConfig<T>,
) -> Result<JuliaInequalityReport<T>> {
    let lambda = match exact_lambda_rational(phi) {
        Ok(l) => l,
        Err(HardyError::NotRational(_)) => analyze(phi, config)?.report.lambda,
        Err(e) => return Err(e),
    };
    julia_inequality_with_lambda(phi, lambda, r_values, margin)
}

pub fn julia_inequality_with_lambda<T: Real>(
    phi: &MapSpec<T>,
    lambda: Extended<T>,
    r_values: &[T],
    margin: T,
) -> Result<JuliaInequalityReport<T>> {
    let psi = conjugate_map(phi)?;
    let bound = match lambda {
        Extended::Finite(l) => Extended::Finite(l * (T::one() + margin)),
        Extended::Infinite => Extended::Infinite,
    };
    let mut samples = Vec::with_capacity(r_values.len());
    for &r in r_values {
        if !(r > T::zero() && r < T::one()) {
            return Err(HardyError::DomainError(format!("r = {r} is outside (0, 1)")));
        }
        let s = psi.eval(Complex::new(r, T::zero()))?;
        let one = Complex::new(T::one(), T::zero());
        let lhs = (one - s).norm_sqr() / ((T::one() - r) * (T::one() - r));
        let rhs = (T::one() - s.norm_sqr()) / (T::one() - r * r);
        samples.push(JuliaSample {
            r,
            lhs,
            rhs,
            quotient_ratio: lhs / rhs,
        });
    }
    let max_quotient_ratio = samples
        .iter()
        .fold(T::neg_infinity(), |m, s| m.max(s.quotient_ratio));
    let holds = match bound {
        Extended::Finite(m) => samples.iter().all(|s| s.lhs <= m * s.rhs),
        Extended::Infinite => false,
    };
    Ok(JuliaInequalityReport {
        lambda,
        bound,
        samples,
        max_quotient_ratio,
        holds,
    })
}

/// Both sides of the disk/half-plane ratio identity at `ζ`; re-exported
/// here for callers working with a precomputed conjugate.
pub fn julia_identity_gap<T: Real>(phi: &MapSpec<T>, psi: &ConjugatedMap<T>, zeta: Complex<T>) -> Result<T> {
    let (l, r) = julia_identity_with(phi, psi, zeta)?;
    Ok(rel_gap(l, r))
}

/// `τ(ζ)` exposed for path construction in the disk.
pub fn disk_point_to_half_plane<T: Real>(zeta: Complex<T>) -> Result<Complex<T>> {
    cayley(zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::BlackBox;
    use crate::scalar::c;
    use approx::assert_relative_eq;

    fn cfg() -> AngularConfig<f64> {
        AngularConfig::default()
    }

    fn dil(a: f64) -> MapSpec<f64> {
        MapSpec::affine(a, c(0.0, 0.0)).unwrap()
    }

    fn z_plus_inv() -> MapSpec<f64> {
        MapSpec::rational_real(&[1.0, 0.0, 1.0], &[0.0, 1.0]).unwrap()
    }

    #[test]
    fn ratio_values() {
        assert_eq!(ratio(&dil(2.0), c(3.0, 4.0)).unwrap(), 0.5);
        assert_eq!(ratio(&MapSpec::affine(1.0, c(1.0, 0.0)).unwrap(), c(1.0, 0.0)).unwrap(), 0.5);
        let inv = MapSpec::rational_real(&[1.0], &[0.0, 1.0]).unwrap();
        assert_relative_eq!(ratio(&inv, c(3.0, 0.0)).unwrap(), 9.0, epsilon = 1e-14);
        let neg = MapSpec::rational_real(&[0.0, -1.0], &[1.0]).unwrap();
        assert!(matches!(ratio(&neg, c(1.0, 0.0)), Err(HardyError::SelfMapViolation { .. })));
    }

    #[test]
    fn exact_lambda_examples() {
        assert_eq!(exact_lambda_rational(&z_plus_inv()).unwrap(), Extended::Finite(1.0));
        assert_eq!(
            exact_lambda_rational(&MapSpec::affine(0.5, c(1.0, 0.0)).unwrap()).unwrap(),
            Extended::Finite(2.0)
        );
        let r = MapSpec::rational_real(&[2.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(exact_lambda_rational(&r).unwrap(), Extended::Infinite);
        let bb = MapSpec::BlackBox(BlackBox::<f64>::builtin("sqrt").unwrap());
        assert!(matches!(exact_lambda_rational(&bb), Err(HardyError::NotRational(_))));
    }

    #[test]
    fn estimate_for_dilation() {
        let r = estimate_lambda(&dil(2.0), &cfg()).unwrap();
        assert_eq!(r.lambda, Extended::Finite(0.5));
        assert!(r.fixes_infinity);
        assert_relative_eq!(r.sup_ratio, 0.5, epsilon = 1e-15);
        for e in [r.limsup_ratio, r.nt_limit, r.disk_quotient_limit] {
            assert_relative_eq!(e.finite().unwrap(), 0.5, epsilon = 1e-6);
        }
    }

    #[test]
    fn estimate_for_z_plus_inverse() {
        let r = estimate_lambda(&z_plus_inv(), &cfg()).unwrap();
        assert_eq!(r.lambda, Extended::Finite(1.0));
        assert!(r.agreement_gap < 1e-3, "{r:?}");
    }

    #[test]
    fn estimate_for_sqrt() {
        let bb = MapSpec::BlackBox(BlackBox::<f64>::builtin("sqrt").unwrap());
        let r = estimate_lambda(&bb, &cfg()).unwrap();
        assert!(r.fixes_infinity);
        assert_eq!(r.lambda, Extended::Infinite);
        assert_eq!(r.method, LambdaMethod::Numeric);
    }

    #[test]
    fn estimate_for_inverse() {
        let inv = MapSpec::rational_real(&[1.0], &[0.0, 1.0]).unwrap();
        let r = estimate_lambda(&inv, &cfg()).unwrap();
        assert!(!r.fixes_infinity);
        assert_eq!(r.lambda, Extended::Infinite);
    }

    #[test]
    fn numeric_estimate_for_black_box_with_finite_lambda() {
        let bb = MapSpec::BlackBox(BlackBox::<f64>::builtin("z_plus_sqrt").unwrap());
        let r = estimate_lambda(&bb, &cfg()).unwrap();
        assert!(r.fixes_infinity);
        assert_relative_eq!(r.lambda.finite().unwrap(), 1.0, epsilon = 1e-3);
        assert!(r.agreement_gap <= 1e-2);
    }

    #[test]
    fn decisions() {
        let certify = CertifyConfig::default();
        let v = decide_boundedness(&dil(2.0), &certify, &cfg()).unwrap();
        match v {
            BoundednessVerdict::Bounded {
                lambda,
                norm,
                essential_norm,
                spectral_radius,
            } => {
                assert_eq!(lambda, 0.5);
                assert_relative_eq!(norm, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-16);
                assert_eq!(norm, essential_norm);
                assert_eq!(norm, spectral_radius);
            }
            other => panic!("{other:?}"),
        }
        let constant = MapSpec::rational_real(&[1.0], &[1.0]).unwrap();
        match decide_boundedness(&constant, &certify, &cfg()).unwrap() {
            BoundednessVerdict::Unbounded { reason, witness } => {
                assert_eq!(reason, UnboundedReason::InfinityNotFixed);
                assert!(witness.ratio > 1e7);
            }
            other => panic!("{other:?}"),
        }
        let bb = MapSpec::BlackBox(BlackBox::<f64>::builtin("sqrt").unwrap());
        match decide_boundedness(&bb, &certify, &cfg()).unwrap() {
            BoundednessVerdict::Unbounded { reason, .. } => {
                assert_eq!(reason, UnboundedReason::InfiniteAngularDerivative)
            }
            other => panic!("{other:?}"),
        }
        let shift_left = MapSpec::rational_real(&[-1.0, 1.0], &[1.0]).unwrap();
        assert!(matches!(
            decide_boundedness(&shift_left, &certify, &cfg()).unwrap(),
            BoundednessVerdict::NotSelfMap { .. }
        ));
    }

    #[test]
    fn invariants() {
        let inv = invariants_from_lambda(4.0, 1.0).unwrap();
        assert_eq!((inv.norm, inv.essential_norm, inv.spectral_radius, inv.hp_norm), (2.0, 2.0, 2.0, 4.0));
        let one = invariants_from_lambda(1.0, 3.0).unwrap();
        assert_eq!((one.norm, one.hp_norm), (1.0, 1.0));
        let two = invariants_from_lambda(2.0, 2.0).unwrap();
        assert_eq!(two.hp_norm, two.norm);
        assert!(invariants_from_lambda(0.0, 1.0).is_err());
        assert!(invariants_from_lambda(1.0, -1.0).is_err());
    }

    #[test]
    fn iterate_lambdas() {
        let (a, b) = iterate_lambda_check(&MapSpec::affine(0.5, c(0.0, 0.0)).unwrap(), 3).unwrap();
        assert_eq!((a, b), (8.0, 8.0));
        assert_eq!(iterate_lambda_check(&MapSpec::<f64>::identity(), 4).unwrap(), (1.0, 1.0));
        let (a, b) = iterate_lambda_check(&MapSpec::affine(0.5, c(1.0, 0.0)).unwrap(), 2).unwrap();
        assert_eq!((a, b), (4.0, 4.0));
    }

    #[test]
    fn julia_inequality() {
        let id = julia_inequality_check(&MapSpec::<f64>::identity(), &[0.5, 0.9], 0.0, &cfg()).unwrap();
        assert!(id.holds);
        for s in &id.samples {
            assert_relative_eq!(s.quotient_ratio, 1.0, epsilon = 1e-14);
        }
        let d = julia_inequality_check(&dil(2.0), &[0.9], 0.01, &cfg()).unwrap();
        assert!(d.holds);
        assert_relative_eq!(d.samples[0].quotient_ratio, 0.5, epsilon = 1e-14);
        let bb = MapSpec::BlackBox(BlackBox::<f64>::builtin("sqrt").unwrap());
        let s = julia_inequality_check(&bb, &[0.9, 0.99, 0.999], 0.01, &cfg()).unwrap();
        assert!(!s.holds);
        assert!(s.samples.windows(2).all(|w| w[1].quotient_ratio > w[0].quotient_ratio));
    }

    #[test]
    fn path_validation() {
        assert!(NontangentialPath::new(1.6, vec![1.0, 2.0]).is_err());
        assert!(NontangentialPath::new(0.3, vec![2.0, 1.0]).is_err());
        let p = NontangentialPath::<f64>::new(0.3, vec![1.0, 2.0]).unwrap();
        for z in p.points() {
            assert_relative_eq!(z.im.abs() / z.re, p.aperture(), epsilon = 1e-14);
        }
    }

    #[test]
    fn extrapolation_accelerates_geometric_tail() {
        let xs: Vec<f64> = (0..10).map(|k| 1.0 - 0.5f64.powi(k)).collect();
        assert_relative_eq!(extrapolate(&xs), 1.0, epsilon = 1e-14);
        assert_eq!(extrapolate(&[3.0, 3.0, 3.0]), 3.0);
    }
}
