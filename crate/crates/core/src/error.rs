use num_complex::Complex;
use thiserror::Error;

/// Errors raised by map evaluation, certification and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HardyError {
    #[error("denominator vanishes at {re}{im:+}i")]
    PoleHit { re: f64, im: f64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("degenerate map specification: {0}")]
    DegenerateSpec(String),
    #[error("self-map violation: Re φ({re}{im:+}i) = {value} is not positive")]
    SelfMapViolation { re: f64, im: f64, value: f64 },
    #[error("map is not rational: {0}")]
    NotRational(String),
    #[error("angular derivative estimates disagree (relative gap {gap:.3e})")]
    Inconclusive { gap: f64 },
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NonHermitianInput(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T, E = HardyError> = std::result::Result<T, E>;

impl HardyError {
    pub(crate) fn pole<T: crate::Real>(z: Complex<T>) -> Self {
        HardyError::PoleHit {
            re: z.re.to_f64().unwrap_or(f64::NAN),
            im: z.im.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub(crate) fn violation<T: crate::Real>(z: Complex<T>, value: T) -> Self {
        HardyError::SelfMapViolation {
            re: z.re.to_f64().unwrap_or(f64::NAN),
            im: z.im.to_f64().unwrap_or(f64::NAN),
            value: value.to_f64().unwrap_or(f64::NAN),
        }
    }
}
