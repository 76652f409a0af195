//! Partition-and-weight norms on finite coefficient sequences.
//!
//! Every function in `L_p[0, 1]` handled here is a dyadic step function, so
//! integrals, `L_p` norms and conditional expectations are finite sums.
//! On top of that calculus the crate provides
//!
//! - [`norms`]: the partition-weight norm `‖a‖_{P,W}`, family suprema and
//!   the reference norms (ℓ_p, mixed, square-function, expansion);
//! - [`duality`]: norming functions `g` and the weights `(∫ g x_n²)^{1/2}`
//!   they induce, including the Hölder maximizer;
//! - [`bases`]: disjoint indicators, Rademacher grids, digit-block
//!   independent functions and the Haar system with closed-form weights;
//! - [`experiments`]: seeded certification runs comparing independent
//!   computations of each identity and inequality.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the
//! experiments and the CLI.

// `!(x > y)` is the NaN-rejecting form used for every validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bases;
pub mod duality;
pub mod error;
pub mod experiments;
pub mod norms;
pub mod scalar;
pub mod stepfn;

pub use error::{Error, Result};
pub use scalar::Real;

pub type StepFunction64 = stepfn::StepFunction<f64>;
pub type StepFunction32 = stepfn::StepFunction<f32>;
pub type Coefficients64 = norms::Coefficients<f64>;
pub type Coefficients32 = norms::Coefficients<f32>;
pub type Weights64 = norms::Weights<f64>;
pub type PWPair64 = norms::PWPair<f64>;
pub type Family64 = norms::Family<f64>;
pub type Family32 = norms::Family<f32>;
pub type Basis64 = norms::BasisSequence<f64>;
pub type Basis32 = norms::BasisSequence<f32>;
pub type NormingFunction64 = duality::NormingFunction<f64>;
pub type NormingFunction32 = duality::NormingFunction<f32>;
pub type HaarG64 = bases::HaarG<f64>;
pub type HaarCoefficients64 = bases::HaarCoefficients<f64>;
