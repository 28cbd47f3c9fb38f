//! Floating-point abstraction used by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Scalar type the reconstruction math is generic over: `f32` or `f64`.
///
/// The concrete aliases at the crate root fix `f64`, which is what the
/// pipelines and the CLI use; `f32` is available for memory-bound callers.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for converting literals and intermediate `f64` values into `T`.
#[inline]
pub fn cast<T: Scalar>(value: f64) -> T {
    T::from_f64(value).expect("f64 is representable in every Scalar type")
}
