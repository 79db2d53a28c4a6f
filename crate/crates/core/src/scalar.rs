//! Scalar abstraction: every numeric kernel in this crate is generic over the
//! working floating-point type.

use std::fmt;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating-point scalar the crate is generic over (`f32` or `f64`).
///
/// The formatting and parsing bounds exist for the text formats, which write
/// entries in scientific notation and read them back losslessly.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssignOps
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Draws one standard normal variate of this scalar type.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Converts an `f64` constant (tolerances, bound coefficients) into the
/// working scalar type.
#[inline]
pub fn cast<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("constant representable in scalar type")
}
