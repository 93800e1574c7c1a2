use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the solver is generic over: f32 or f64.
pub trait Scalar:
    Float + NumAssign + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + 'static
{
    /// Shorthand for lossy conversion from f64 (panics only for exotic types).
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("representable scalar")
    }
}

impl<T> Scalar for T where
    T: Float + NumAssign + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + 'static
{
}
