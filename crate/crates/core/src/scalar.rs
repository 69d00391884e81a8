use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point type every estimator is generic over.
///
/// Implemented for `f32` and `f64`. Special functions that have no generic
/// implementation in `num-traits` (the error function, log-gamma and the
/// normal quantile) are evaluated in `f64` and converted back.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Standard normal density.
#[inline]
pub(crate) fn std_normal_pdf<T: Scalar>(u: T) -> T {
    let half: T = lit(0.5);
    (-(half * u * u)).exp() / (T::TAU()).sqrt()
}

/// Standard normal distribution function.
#[inline]
pub(crate) fn std_normal_cdf<T: Scalar>(u: T) -> T {
    lit(0.5 * statrs::function::erf::erfc(-to_f64(u) / std::f64::consts::SQRT_2))
}

/// Upper quantile of the standard normal: z such that P(Z > z) = p.
pub(crate) fn std_normal_upper_quantile<T: Scalar>(p: T) -> T {
    use statrs::distribution::{ContinuousCDF, Normal};
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    lit(normal.inverse_cdf(1.0 - to_f64(p)))
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / from_usize(n - 1);
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + step * from_usize(i)).exp()
            }
        })
        .collect()
}

/// `n` equispaced points from `lo` to `hi` inclusive.
pub fn linspace<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / from_usize(n - 1);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + step * from_usize(i)
            }
        })
        .collect()
}
