//! Scalar abstraction for all numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar used throughout the crate: `f32` or `f64`.
///
/// Everything numerical is generic over this trait; concrete aliases for the
/// common instantiations live at the crate root.
pub trait Float:
    num_traits::Float + num_traits::FromPrimitive + num_traits::NumCast + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking only for values outside the
    /// target type's range (never the case for the constants in this crate).
    fn cast(value: f64) -> Self {
        Self::from(value).expect("constant representable in scalar type")
    }

    /// Converts a count to the scalar type.
    fn from_count(value: usize) -> Self {
        Self::from(value).expect("count representable in scalar type")
    }
}

impl Float for f32 {}
impl Float for f64 {}
