//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra as na;
use num_traits as nt;
use serde::Serialize;

/// Floating point type the kernels, Gram matrices and statistics are
/// computed in. Implemented for `f32` and `f64`.
///
/// Elementary functions (`exp`, `sqrt`, `abs`, ...) come from
/// [`nalgebra::RealField`]; conversions to and from primitives come from
/// `num-traits`.
pub trait Scalar:
    na::RealField
    + Copy
    + nt::FromPrimitive
    + nt::ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Serialize
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`, rounding if necessary.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Relative tolerance `base`, floored at a small multiple of machine epsilon
/// so that the f64-calibrated constants stay meaningful for `f32`.
#[inline]
pub fn rel_tol<T: Scalar>(base: f64) -> T {
    let floor = T::default_epsilon() * T::lit(64.0);
    let base = T::lit(base);
    if base > floor {
        base
    } else {
        floor
    }
}
