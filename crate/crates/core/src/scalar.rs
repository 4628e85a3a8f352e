//! Floating-point abstraction shared by the numerical modules.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Bundle of the bounds needed by the kernel, linear-algebra and GP code.
///
/// Implemented for every type satisfying the bounds, in practice `f32` and
/// `f64`. Fitting is only numerically meaningful in `f64`; `f32` is useful
/// for evaluating kernels on stored hyperparameters.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for constants.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + LowerExp
        + Sum
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Send
        + Sync
        + 'static
{
}

/// `(sin x, cos x)` from `libm`. The platform sin/cos pair can be fused into
/// a `sincos` call or not depending on inlining, which changes the last bit
/// between builds; fits amplify that, so angles go through one code path.
#[inline]
pub(crate) fn sin_cos<T: Scalar>(x: T) -> (T, T) {
    let x = x.to_f64_lossy();
    (T::c(libm::sin(x)), T::c(libm::cos(x)))
}

/// `|x|^p` for the two supported exponents without calling `powi` for p = 1.
#[inline]
pub(crate) fn abs_pow<T: Scalar>(x: T, p: u8) -> T {
    let a = x.abs();
    match p {
        1 => a,
        2 => a * a,
        _ => a.powi(i32::from(p)),
    }
}
