//! Scalar abstraction shared by plain evaluation (`f64`) and the
//! reverse-mode gradient engine ([`crate::autodiff::Var`]).
//!
//! Every constitutive routine in this crate is written once against
//! [`Real`]. Running it with `f64` gives stresses; running it with `Var`
//! records the same arithmetic on a tape so the training loss can be
//! differentiated with respect to the network weights.

use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// A constant, i.e. a value that carries no derivative.
    fn cst(v: f64) -> Self;

    /// The primal value.
    fn value(self) -> f64;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn cosh(self) -> Self;
    fn sinh(self) -> Self;
    fn tanh(self) -> Self;
    fn powf(self, p: f64) -> Self;

    /// Absolute value whose derivative at the kink is `sign(0) = 0`.
    fn abs(self) -> Self;

    #[inline]
    fn zero() -> Self {
        Self::cst(0.0)
    }

    #[inline]
    fn one() -> Self {
        Self::cst(1.0)
    }

    #[inline]
    fn powi2(self) -> Self {
        self * self
    }

    /// `ln(cosh(x))` evaluated without overflowing for large `|x|`.
    fn ln_cosh(self) -> Self;
}

/// Sign with `sign(0) = 0`.
#[inline]
pub fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `ln(cosh(x)) = |x| + ln(1 + exp(-2|x|)) - ln 2`.
#[inline]
pub(crate) fn ln_cosh_f64(x: f64) -> f64 {
    let a = libm::fabs(x);
    a + libm::log1p(libm::exp(-2.0 * a)) - core::f64::consts::LN_2
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn exp(self) -> Self {
        libm::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        libm::log(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        libm::cosh(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        libm::sinh(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        libm::tanh(self)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        libm::pow(self, p)
    }
    #[inline]
    fn abs(self) -> Self {
        libm::fabs(self)
    }
    #[inline]
    fn ln_cosh(self) -> Self {
        ln_cosh_f64(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_cosh_matches_naive_form_and_stays_finite() {
        for &x in &[-3.0, -0.5, 0.0, 1e-3, 2.0, 10.0] {
            let naive = libm::log(libm::cosh(x));
            assert!((ln_cosh_f64(x) - naive).abs() < 1e-14, "x = {x}");
        }
        assert!(ln_cosh_f64(1000.0).is_finite());
        assert!((ln_cosh_f64(1000.0) - (1000.0 - core::f64::consts::LN_2)).abs() < 1e-9);
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(sign0(0.0), 0.0);
        assert_eq!(sign0(-0.0), 0.0);
        assert_eq!(sign0(2.0), 1.0);
        assert_eq!(sign0(-1e-300), -1.0);
    }
}
