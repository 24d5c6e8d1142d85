//! Real-root isolation with Sturm sequences, used to decide whether a real
//! polynomial is nonnegative on the whole real line.

use crate::scalar::{lit, Real};

/// Real polynomial in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Real> RealPoly<T> {
    /// Builds the polynomial, dropping leading coefficients that are below
    /// `rel` times the largest coefficient.
    pub fn new(coeffs: Vec<T>, rel: T) -> Self {
        let mut p = RealPoly { coeffs };
        p.trim(rel);
        p
    }

    fn trim(&mut self, rel: T) {
        let scale = self.max_abs();
        while self
            .coeffs
            .last()
            .is_some_and(|c| c.abs() <= rel * scale || *c == T::zero())
        {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }

    fn derivative(&self) -> Self {
        RealPoly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::from_usize(k).unwrap())
                .collect(),
        }
    }

    /// Remainder of `self / divisor` with roundoff trimming relative to the
    /// dividend's scale.
    fn rem(&self, divisor: &Self, rel: T) -> Self {
        let mut r = self.coeffs.clone();
        let dd = divisor.coeffs.len() - 1;
        let lead = divisor.coeffs[dd];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let factor = r[k] / lead;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                let idx = k - dd + j;
                r[idx] = r[idx] - factor * d;
            }
            r.pop();
        }
        let scale = self.max_abs().max(divisor.max_abs());
        let mut out = RealPoly { coeffs: r };
        while out
            .coeffs
            .last()
            .is_some_and(|c| c.abs() <= rel * scale)
        {
            out.coeffs.pop();
        }
        out
    }

    /// Sign at `+∞` (`towards_positive`) or `-∞`.
    fn sign_at_infinity(&self, towards_positive: bool) -> i8 {
        let Some(d) = self.degree() else { return 0 };
        let lead = self.coeffs[d];
        let s = if lead > T::zero() { 1 } else { -1 };
        if towards_positive || d % 2 == 0 {
            s
        } else {
            -s
        }
    }

    /// Cauchy bound: every real root lies in `[-B, B]`.
    pub fn root_bound(&self) -> T {
        match self.degree() {
            None | Some(0) => T::one(),
            Some(d) => {
                let lead = self.coeffs[d].abs();
                T::one()
                    + self.coeffs[..d]
                        .iter()
                        .fold(T::zero(), |m, c| m.max(c.abs() / lead))
            }
        }
    }
}

/// Sturm sequence `p, p', -rem(p, p'), ...`, terminated at the (numerical) gcd.
#[derive(Debug, Clone)]
pub struct SturmSequence<T> {
    chain: Vec<RealPoly<T>>,
}

impl<T: Real> SturmSequence<T> {
    pub fn new(p: &RealPoly<T>) -> Self {
        let rel = T::epsilon() * lit(1.0e3);
        let mut chain = vec![p.clone()];
        let d = p.derivative();
        if !d.is_zero() {
            chain.push(d);
        }
        while chain.len() >= 2 {
            let n = chain.len();
            let r = chain[n - 2].rem(&chain[n - 1], rel);
            if r.is_zero() {
                break;
            }
            chain.push(RealPoly {
                coeffs: r.coeffs.into_iter().map(|c| -c).collect(),
            });
        }
        SturmSequence { chain }
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    fn variations(signs: impl Iterator<Item = i8>) -> usize {
        let mut last = 0i8;
        let mut count = 0;
        for s in signs.filter(|&s| s != 0) {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    fn variations_at(&self, x: T) -> usize {
        Self::variations(self.chain.iter().map(|p| {
            let v = p.eval(x);
            if v > T::zero() {
                1
            } else if v < T::zero() {
                -1
            } else {
                0
            }
        }))
    }

    fn variations_at_infinity(&self, towards_positive: bool) -> usize {
        Self::variations(
            self.chain
                .iter()
                .map(|p| p.sign_at_infinity(towards_positive)),
        )
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count_in(&self, a: T, b: T) -> usize {
        self.variations_at(a).saturating_sub(self.variations_at(b))
    }

    /// Number of distinct real roots.
    pub fn count_all(&self) -> usize {
        self.variations_at_infinity(false)
            .saturating_sub(self.variations_at_infinity(true))
    }
}

/// Disjoint intervals `(a, b]`, each containing exactly one distinct real
/// root, sorted increasingly and narrowed to relative width `width`.
pub fn isolate_real_roots<T: Real>(p: &RealPoly<T>, width: T) -> Vec<(T, T)> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let seq = SturmSequence::new(p);
    let bound = p.root_bound() * lit(1.01);
    let mut out = Vec::new();
    let mut stack = vec![(-bound, bound, 0usize)];
    while let Some((a, b, depth)) = stack.pop() {
        let n = seq.count_in(a, b);
        if n == 0 {
            continue;
        }
        let tiny = width * (T::one() + a.abs().max(b.abs()));
        if n == 1 || depth > 200 || b - a <= tiny {
            out.push(narrow(&seq, a, b, width));
            continue;
        }
        let mid = (a + b) * lit(0.5);
        stack.push((mid, b, depth + 1));
        stack.push((a, mid, depth + 1));
    }
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    out
}

fn narrow<T: Real>(seq: &SturmSequence<T>, mut a: T, mut b: T, width: T) -> (T, T) {
    for _ in 0..200 {
        if b - a <= width * (T::one() + a.abs().max(b.abs())) {
            break;
        }
        let mid = (a + b) * lit(0.5);
        if seq.count_in(a, mid) >= 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    (a, b)
}

/// Outcome of a nonnegativity test on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignCheck<T> {
    Nonnegative,
    /// A point where the polynomial is strictly negative.
    NegativeAt(T),
}

/// Decides `p(y) >= 0` for every real `y`: isolates the distinct real
/// roots and samples one point inside every gap between them (and beyond
/// both ends). The sign is constant on every gap.
pub fn check_nonnegative<T: Real>(p: &RealPoly<T>) -> SignCheck<T> {
    if p.is_zero() {
        return SignCheck::Nonnegative;
    }
    let roots = isolate_real_roots(p, lit(1.0e-10));
    let mut samples = Vec::with_capacity(roots.len() + 1);
    match (roots.first(), roots.last()) {
        (Some(first), Some(last)) => {
            samples.push(first.0 - T::one());
            for w in roots.windows(2) {
                samples.push((w[0].1 + w[1].0) * lit(0.5));
            }
            samples.push(last.1 + T::one());
        }
        _ => samples.push(T::zero()),
    }
    for y in samples {
        if p.eval(y) < T::zero() {
            return SignCheck::NegativeAt(y);
        }
    }
    SignCheck::Nonnegative
}
