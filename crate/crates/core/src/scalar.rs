//! Scalar abstraction shared by the numerical kernels.
//!
//! Every closed form, quadrature rule and optimizer in this crate is written
//! against [`Real`] so it runs on `f32` or `f64`. The special functions are
//! supplied per type; `f32` evaluates them in `f64` and narrows the result.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the numerical core.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Machine-independent "small" used by the kernels as a floor for tolerances.
    const TOL_FLOOR: f64;

    /// Natural log of the gamma function for positive arguments.
    fn ln_gamma(self) -> Self;

    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Regularized incomplete beta function `I_x(a, b)`.
    fn beta_reg(a: Self, b: Self, x: Self) -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const TOL_FLOOR: f64 = 1e-14;

    fn ln_gamma(self) -> Self {
        libm::lgamma_r(self).0
    }

    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    fn beta_reg(a: Self, b: Self, x: Self) -> Self {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            statrs::function::beta::beta_reg(a, b, x)
        }
    }
}

impl Real for f32 {
    const TOL_FLOOR: f64 = 1e-6;

    fn ln_gamma(self) -> Self {
        <f64 as Real>::ln_gamma(f64::from(self)) as f32
    }

    fn erfc(self) -> Self {
        <f64 as Real>::erfc(f64::from(self)) as f32
    }

    fn beta_reg(a: Self, b: Self, x: Self) -> Self {
        <f64 as Real>::beta_reg(f64::from(a), f64::from(b), f64::from(x)) as f32
    }
}

/// `ln B(a, b)` through log-gamma, safe for large shape parameters.
pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    a.ln_gamma() + b.ln_gamma() - (a + b).ln_gamma()
}

/// Numerically stable `ln(sum(exp(xs)))`.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<T>().ln()
}
