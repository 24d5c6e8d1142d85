//! Holomorphic maps of the right half-plane (and, after conjugation, of the
//! disk): representation, evaluation, composition and iteration.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::poly::{compose_rational, Poly};
use crate::scalar::{is_finite_c, Real};

type Evaluator<T> = Arc<dyn Fn(Complex<T>) -> Complex<T> + Send + Sync>;

/// Opaque evaluator. Only the name survives serialization; deserialization
/// resolves names through [`BlackBox::builtin`].
#[derive(Clone)]
pub struct BlackBox<T> {
    name: String,
    eval: Evaluator<T>,
}

impl<T: Real> BlackBox<T> {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static,
    ) -> Self {
        BlackBox {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// Named evaluators available from map files. All use principal branches.
    ///
    /// * `sqrt`: `√z`
    /// * `z_plus_sqrt`: `z + √z`
    /// * `log1p`: `log(1 + z)`
    pub fn builtin(name: &str) -> Option<Self> {
        let bb = match name {
            "sqrt" => Self::new(name, |z: Complex<T>| z.sqrt()),
            "z_plus_sqrt" => Self::new(name, |z: Complex<T>| z + z.sqrt()),
            "log1p" => Self::new(name, |z: Complex<T>| (Complex::<T>::one() + z).ln()),
            _ => return None,
        };
        Some(bb)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn call(&self, z: Complex<T>) -> Complex<T> {
        (self.eval)(z)
    }
}

impl<T> fmt::Debug for BlackBox<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBox").field("name", &self.name).finish()
    }
}

/// Description of a holomorphic map.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(
    try_from = "MapRepr<T>",
    into = "MapRepr<T>",
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned")
)]
pub enum MapSpec<T: Real> {
    /// `a z + b` with `a > 0`, `Re b >= 0`.
    Affine { a: T, b: Complex<T> },
    /// Ratio of polynomials with ascending complex coefficients.
    Rational { num: Poly<T>, den: Poly<T> },
    /// `(a z + b) / (c z + d)`.
    Mobius {
        a: Complex<T>,
        b: Complex<T>,
        c: Complex<T>,
        d: Complex<T>,
    },
    /// `maps[0] ∘ maps[1] ∘ ...`: the first listed map is applied last.
    Compose(Vec<MapSpec<T>>),
    BlackBox(BlackBox<T>),
}

impl<T: Real> PartialEq for MapSpec<T> {
    fn eq(&self, other: &Self) -> bool {
        use MapSpec::*;
        match (self, other) {
            (Affine { a, b }, Affine { a: a2, b: b2 }) => a == a2 && b == b2,
            (Rational { num, den }, Rational { num: n2, den: d2 }) => num == n2 && den == d2,
            (
                Mobius { a, b, c, d },
                Mobius {
                    a: a2,
                    b: b2,
                    c: c2,
                    d: d2,
                },
            ) => a == a2 && b == b2 && c == c2 && d == d2,
            (Compose(x), Compose(y)) => x == y,
            (BlackBox(x), BlackBox(y)) => x.name == y.name,
            _ => false,
        }
    }
}

impl<T: Real> MapSpec<T> {
    pub fn identity() -> Self {
        MapSpec::Affine {
            a: T::one(),
            b: Complex::zero(),
        }
    }

    pub fn affine(a: T, b: Complex<T>) -> Result<Self> {
        let spec = MapSpec::Affine { a, b };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rational(num: Vec<Complex<T>>, den: Vec<Complex<T>>) -> Result<Self> {
        let spec = MapSpec::Rational {
            num: Poly::new(num),
            den: Poly::new(den),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Rational map from real coefficients, ascending degree.
    pub fn rational_real(num: &[T], den: &[T]) -> Result<Self> {
        let cx = |v: &[T]| v.iter().map(|&x| Complex::new(x, T::zero())).collect();
        Self::rational(cx(num), cx(den))
    }

    pub fn mobius(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Result<Self> {
        let spec = MapSpec::Mobius { a, b, c, d };
        spec.validate()?;
        Ok(spec)
    }

    pub fn compose(maps: Vec<MapSpec<T>>) -> Result<Self> {
        let spec = MapSpec::Compose(maps);
        spec.validate()?;
        Ok(spec)
    }

    pub fn black_box(
        name: impl Into<String>,
        eval: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static,
    ) -> Self {
        MapSpec::BlackBox(BlackBox::new(name, eval))
    }

    /// Checks the structural invariants of every variant.
    pub fn validate(&self) -> Result<()> {
        match self {
            MapSpec::Affine { a, b } => {
                if !(a.is_finite() && *a > T::zero()) {
                    return Err(HardyError::DegenerateSpec(format!(
                        "affine coefficient a = {a} must be positive"
                    )));
                }
                if !is_finite_c(*b) || b.re < T::zero() {
                    return Err(HardyError::DegenerateSpec(format!(
                        "affine offset b = {b} must have nonnegative real part"
                    )));
                }
            }
            MapSpec::Rational { num, den } => {
                if den.is_zero() {
                    return Err(HardyError::DegenerateSpec(
                        "rational denominator is the zero polynomial".into(),
                    ));
                }
                if num.coeffs().iter().chain(den.coeffs()).any(|c| !is_finite_c(*c)) {
                    return Err(HardyError::DegenerateSpec("non-finite coefficient".into()));
                }
            }
            MapSpec::Mobius { a, b, c, d } => {
                if [a, b, c, d].iter().any(|v| !is_finite_c(**v)) {
                    return Err(HardyError::DegenerateSpec("non-finite coefficient".into()));
                }
                if c.is_zero() && d.is_zero() {
                    return Err(HardyError::DegenerateSpec(
                        "Möbius denominator c z + d is identically zero".into(),
                    ));
                }
            }
            MapSpec::Compose(maps) => {
                if maps.is_empty() {
                    return Err(HardyError::DegenerateSpec("empty composition".into()));
                }
                for m in maps {
                    m.validate()?;
                }
            }
            MapSpec::BlackBox(_) => {}
        }
        Ok(())
    }

    pub fn is_black_box(&self) -> bool {
        match self {
            MapSpec::BlackBox(_) => true,
            MapSpec::Compose(maps) => maps.iter().any(|m| m.is_black_box()),
            _ => false,
        }
    }

    /// Evaluates without a domain check; used for disk maps and for
    /// intermediate stages of compositions.
    pub fn evaluate(&self, z: Complex<T>) -> Result<Complex<T>> {
        let out = match self {
            MapSpec::Affine { a, b } => z * *a + *b,
            MapSpec::Rational { num, den } => {
                let q = den.eval(z);
                if q.is_zero() {
                    return Err(HardyError::pole(z));
                }
                num.eval(z) / q
            }
            MapSpec::Mobius { a, b, c, d } => {
                let q = *c * z + *d;
                if q.is_zero() {
                    return Err(HardyError::pole(z));
                }
                (*a * z + *b) / q
            }
            MapSpec::Compose(maps) => {
                let mut w = z;
                for m in maps.iter().rev() {
                    w = m.evaluate(w)?;
                }
                w
            }
            MapSpec::BlackBox(bb) => bb.call(z),
        };
        if !is_finite_c(out) {
            return Err(HardyError::pole(z));
        }
        Ok(out)
    }

    /// Symbolic numerator/denominator pair, or `None` when a black box is involved.
    pub fn to_rational(&self) -> Option<(Poly<T>, Poly<T>)> {
        match self {
            MapSpec::Affine { a, b } => Some((
                Poly::new(vec![*b, Complex::new(*a, T::zero())]),
                Poly::constant(Complex::one()),
            )),
            MapSpec::Rational { num, den } => Some((num.clone(), den.clone())),
            MapSpec::Mobius { a, b, c, d } => {
                Some((Poly::new(vec![*b, *a]), Poly::new(vec![*d, *c])))
            }
            MapSpec::Compose(maps) => {
                let mut iter = maps.iter().rev();
                let mut acc = iter.next()?.to_rational()?;
                for outer in iter {
                    let (p, q) = outer.to_rational()?;
                    acc = compose_rational((&p, &q), (&acc.0, &acc.1));
                }
                Some(acc)
            }
            MapSpec::BlackBox(_) => None,
        }
    }

    /// `self ∘ inner`, simplified when both sides are affine or both Möbius.
    pub fn after(&self, inner: &MapSpec<T>) -> MapSpec<T> {
        match (self, inner) {
            (MapSpec::Affine { a, b }, MapSpec::Affine { a: a2, b: b2 }) => MapSpec::Affine {
                a: *a * *a2,
                b: *b2 * *a + *b,
            },
            (MapSpec::Mobius { .. }, MapSpec::Mobius { .. }) => {
                let (m1, m2) = (self.mobius_matrix(), inner.mobius_matrix());
                let [a, b, c, d] = mat_mul(m1.unwrap(), m2.unwrap());
                MapSpec::Mobius { a, b, c, d }
            }
            _ => {
                let mut maps = Vec::new();
                for m in [self, inner] {
                    match m {
                        MapSpec::Compose(inner_maps) => maps.extend(inner_maps.iter().cloned()),
                        other => maps.push(other.clone()),
                    }
                }
                MapSpec::Compose(maps)
            }
        }
    }

    fn mobius_matrix(&self) -> Option<[Complex<T>; 4]> {
        match self {
            MapSpec::Mobius { a, b, c, d } => Some([*a, *b, *c, *d]),
            MapSpec::Affine { a, b } => Some([
                Complex::new(*a, T::zero()),
                *b,
                Complex::zero(),
                Complex::one(),
            ]),
            _ => None,
        }
    }

    /// Returns `self - z / lambda` as a map (not necessarily a self-map).
    pub fn minus_linear(&self, lambda: T) -> MapSpec<T> {
        let inv = Complex::new(T::one() / lambda, T::zero());
        match self.to_rational() {
            Some((p, q)) => MapSpec::Rational {
                num: p.sub(&Poly::z().mul(&q).scale(inv)),
                den: q,
            },
            None => {
                let base = self.clone();
                MapSpec::black_box("phi_minus_linear", move |z| match base.evaluate(z) {
                    Ok(v) => v - z * inv,
                    Err(_) => Complex::new(T::nan(), T::nan()),
                })
            }
        }
    }
}

fn mat_mul<T: Real>(m: [Complex<T>; 4], n: [Complex<T>; 4]) -> [Complex<T>; 4] {
    [
        m[0] * n[0] + m[1] * n[2],
        m[0] * n[1] + m[1] * n[3],
        m[2] * n[0] + m[3] * n[2],
        m[2] * n[1] + m[3] * n[3],
    ]
}

/// `φ(z)` for a half-plane map, rejecting points outside the open half-plane.
pub fn eval_map<T: Real>(spec: &MapSpec<T>, z: Complex<T>) -> Result<Complex<T>> {
    if !(z.re > T::zero()) {
        return Err(HardyError::DomainError(format!(
            "Re z = {} is not positive",
            z.re
        )));
    }
    spec.evaluate(z)
}

/// The `n`-th iterate `φ ∘ ... ∘ φ`; `n = 0` gives the identity.
pub fn iterate_map<T: Real>(spec: &MapSpec<T>, n: usize) -> MapSpec<T> {
    match (n, spec) {
        (0, _) => MapSpec::identity(),
        (1, _) => spec.clone(),
        (_, MapSpec::Affine { a, b }) => {
            // a^n z + b (1 + a + ... + a^(n-1))
            let mut an = T::one();
            let mut geom = T::zero();
            for _ in 0..n {
                geom = geom + an;
                an = an * *a;
            }
            MapSpec::Affine { a: an, b: *b * geom }
        }
        (_, MapSpec::Mobius { .. }) => {
            let m = spec.mobius_matrix().unwrap();
            let mut acc = m;
            for _ in 1..n {
                acc = mat_mul(acc, m);
            }
            let [a, b, c, d] = acc;
            MapSpec::Mobius { a, b, c, d }
        }
        _ => MapSpec::Compose(vec![spec.clone(); n]),
    }
}

/// Serialized form of [`MapSpec`]; complex numbers are `[re, im]` pairs.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + DeserializeOwned"))]
pub enum MapRepr<T: Real> {
    Affine {
        a: T,
        b: Complex<T>,
    },
    Rational {
        num: Vec<Complex<T>>,
        den: Vec<Complex<T>>,
    },
    Mobius {
        a: Complex<T>,
        b: Complex<T>,
        c: Complex<T>,
        d: Complex<T>,
    },
    Compose {
        maps: Vec<MapSpec<T>>,
    },
    #[serde(rename = "blackbox")]
    BlackBox {
        name: String,
    },
}

impl<T: Real> TryFrom<MapRepr<T>> for MapSpec<T> {
    type Error = HardyError;

    fn try_from(repr: MapRepr<T>) -> Result<Self> {
        match repr {
            MapRepr::Affine { a, b } => MapSpec::affine(a, b),
            MapRepr::Rational { num, den } => MapSpec::rational(num, den),
            MapRepr::Mobius { a, b, c, d } => MapSpec::mobius(a, b, c, d),
            MapRepr::Compose { maps } => MapSpec::compose(maps),
            MapRepr::BlackBox { name } => BlackBox::builtin(&name)
                .map(MapSpec::BlackBox)
                .ok_or_else(|| HardyError::DegenerateSpec(format!("unknown black box '{name}'"))),
        }
    }
}

impl<T: Real> From<MapSpec<T>> for MapRepr<T> {
    fn from(spec: MapSpec<T>) -> Self {
        match spec {
            MapSpec::Affine { a, b } => MapRepr::Affine { a, b },
            MapSpec::Rational { num, den } => MapRepr::Rational {
                num: num.coeffs().to_vec(),
                den: den.coeffs().to_vec(),
            },
            MapSpec::Mobius { a, b, c, d } => MapRepr::Mobius { a, b, c, d },
            MapSpec::Compose(maps) => MapRepr::Compose { maps },
            MapSpec::BlackBox(bb) => MapRepr::BlackBox { name: bb.name },
        }
    }
}
