//! Scalar abstraction for the numeric layer.
//!
//! Parameter spaces, chains, density estimates, and surfaces are generic over
//! [`Scalar`] so they work at `f32` or `f64`. The crate root exports `f64`
//! aliases, which is what the built-in simulators and the CLI use.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar usable throughout the numeric layer.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + Sum<Self>
    + fmt::Display
    + fmt::Debug
    + fmt::LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; the canonical bridge for RNG draws and
    /// special functions evaluated in double precision.
    fn from_f64_lossy(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("finite f64 converts to any Scalar")
    }

    /// Widening conversion to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar widens to f64")
    }

    /// Error function, evaluated in double precision.
    fn erf(self) -> Self {
        Self::from_f64_lossy(libm::erf(self.as_f64()))
    }

    /// Standard normal CDF Φ(x) = erfc(-x/√2)/2, evaluated in double precision.
    fn normal_cdf(self) -> Self {
        Self::from_f64_lossy(0.5 * libm::erfc(-self.as_f64() / std::f64::consts::SQRT_2))
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumCast
        + Sum<T>
        + fmt::Display
        + fmt::Debug
        + fmt::LowerExp
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}
