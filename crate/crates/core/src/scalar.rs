//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All geometry, analytics and transport code is written against [`Real`],
//! which is implemented for `f32` and `f64`. Tolerances quoted throughout the
//! crate assume `f64`; the `f32` instantiation is useful for quick surveys but
//! will not meet the tighter certificates.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

use crate::eigen::LapackScalar;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + LapackScalar
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly
    /// rounded) in the supported types, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance used for "exact" identities such as the trace check.
    fn identity_tolerance() -> Self;
}

impl Real for f64 {
    fn identity_tolerance() -> Self {
        1e-8
    }
}

impl Real for f32 {
    fn identity_tolerance() -> Self {
        2e-3
    }
}
