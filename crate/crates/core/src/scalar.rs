//! Floating point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Edge weights, passage times and transform values are generic over this trait.
///
/// Special functions (normal CDF and quantile) are evaluated in `f64` and
/// converted, so `f32` environments share the same transform as `f64` ones up
/// to the final rounding.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Left-to-right pairwise summation; deterministic for a fixed slice order.
pub fn pairwise_sum<F: Scalar>(values: &[F]) -> F {
    match values.len() {
        0 => F::zero(),
        1 => values[0],
        len if len <= 8 => values.iter().fold(F::zero(), |acc, &v| acc + v),
        len => {
            let (lo, hi) = values.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}
