use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Real type used for LLR values.
///
/// Everything in the decoders is expressed through `Float` so that the same
/// code runs in `f32` for simulations and `f64` for oracle comparisons.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for channel LLRs.
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
