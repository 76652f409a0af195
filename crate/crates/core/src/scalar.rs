//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal is representable")
    }

    /// Default tolerance for structural validation (normalization checks,
    /// norm-ball membership). `1e-10` for `f64`, scaled up by machine epsilon
    /// for narrower types.
    fn validation_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(1e4))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `2^e` for a real exponent.
pub(crate) fn pow2<T: Real>(e: T) -> T {
    T::lit(2.0).powf(e)
}

/// Dual exponent of `p/2`, i.e. `p/(p-2)`.
pub fn dual_exponent<T: Real>(p: T) -> T {
    p / (p - T::lit(2.0))
}
