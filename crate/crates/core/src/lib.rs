//! Composition operators on the Hardy space `H²` of the right half-plane.
//!
//! A holomorphic self-map `φ` of the half-plane induces a bounded operator
//! `f ↦ f∘φ` exactly when `φ` fixes infinity with a finite angular
//! derivative `λ`; the norm, essential norm and spectral radius then all
//! equal `√λ`. This crate decides boundedness, computes `λ` symbolically or
//! numerically, and cross-checks the result through positive-kernel tests
//! and finite matrix models of the operator.
//!
//! Everything numeric is generic over [`Real`] (`f32`, `f64`); the `*64`
//! aliases below are the binary64 instantiations used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod cayley;
pub mod certify;
pub mod error;
pub mod extended;
pub mod kernels;
pub mod linalg;
pub mod map;
pub mod operator;
pub mod poly;
pub mod scalar;
pub mod sturm;

pub use error::{HardyError, Result};
pub use extended::Extended;
pub use map::{eval_map, iterate_map, BlackBox, MapSpec};
pub use scalar::{ComplexValue, Real};

pub type Complex64 = num_complex::Complex<f64>;
pub type MapSpec64 = map::MapSpec<f64>;
pub type MapSpec32 = map::MapSpec<f32>;
pub type SelfMapCertificate64 = certify::SelfMapCertificate<f64>;
pub type ConjugatedMap64 = cayley::ConjugatedMap<f64>;
pub type PsdReport64 = kernels::PsdReport<f64>;
pub type KernelExpr64 = kernels::KernelExpr<f64>;
pub type AngularDerivativeReport64 = angular::AngularDerivativeReport<f64>;
pub type BoundednessVerdict64 = angular::BoundednessVerdict<f64>;
pub type OperatorInvariants64 = angular::OperatorInvariants<f64>;
pub type TruncatedOperator64 = operator::TruncatedOperator<f64>;
pub type NormEstimate64 = operator::NormEstimate<f64>;
pub type Extended64 = extended::Extended<f64>;
