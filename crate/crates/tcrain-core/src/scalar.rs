use std::fmt::{Debug, Display};
use std::num::ParseFloatError;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point cell value: f32 or f64.
///
/// Grid storage and all per-cell arithmetic are generic over this trait;
/// reductions that feed reports (means, areas) accumulate in f64.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + FromStr<Err = ParseFloatError>
    + Display
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless widening for accumulation.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("float widens to f64")
    }

    /// Narrowing conversion from f64, rounding to the nearest representable value.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 narrows to scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
