//! Double-double scalar: an unevaluated sum `hi + lo` carrying about 32
//! significant digits.
//!
//! Used as the arithmetic of the finite-difference gradient oracle, where the
//! loss difference across a `1e-5` relative step would otherwise drown in
//! the roundoff of a long `f64` rollout.

use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::scalar::Real;

#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

const LN2: Dd = Dd {
    hi: core::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, libm::fma(a, b, -p))
}

impl Dd {
    pub const fn new(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    /// Multiplication by a power of two, exact.
    fn ldexp(self, k: i32) -> Self {
        let s = libm::ldexp(1.0, k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    fn recip(self) -> Self {
        Dd::new(1.0) / self
    }

    fn exp_dd(self) -> Self {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::new(0.0);
        }
        let k = libm::round(self.hi / LN2.hi);
        let r = (self - LN2 * k).ldexp(-10);
        // Taylor series of exp(r) - 1 with |r| < 4e-4
        let mut term = r;
        let mut sum = r;
        for n in 2..=14 {
            term = term * r / n as f64;
            sum += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // (1 + s)² - 1 = s (2 + s), ten times
        for _ in 0..10 {
            sum = sum * (sum + 2.0);
        }
        (sum + 1.0).ldexp(k as i32)
    }

    fn ln_dd(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::new(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        let mut y = Dd::new(libm::log(self.hi));
        for _ in 0..2 {
            y = y + self * (-y).exp_dd() - 1.0;
        }
        y
    }

    fn sinh_dd(self) -> Self {
        if self.hi.abs() < 0.1 {
            let x2 = self * self;
            let mut term = self;
            let mut sum = self;
            for n in 1..=12 {
                term = term * x2 / ((2 * n) as f64 * (2 * n + 1) as f64);
                sum += term;
            }
            sum
        } else {
            let e = self.exp_dd();
            (e - e.recip()) * 0.5
        }
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd::new(v)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::renorm(s, e + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::renorm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + Dd::new(q3)
    }
}

macro_rules! scalar_rhs {
    ($tr:ident, $m:ident) => {
        impl $tr<f64> for Dd {
            type Output = Dd;
            #[inline]
            fn $m(self, b: f64) -> Dd {
                $tr::$m(self, Dd::new(b))
            }
        }
    };
}
scalar_rhs!(Add, add);
scalar_rhs!(Sub, sub);
scalar_rhs!(Mul, mul);
scalar_rhs!(Div, div);

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl Real for Dd {
    fn cst(v: f64) -> Self {
        Dd::new(v)
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }

    fn exp(self) -> Self {
        self.exp_dd()
    }

    fn ln(self) -> Self {
        self.ln_dd()
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::new(libm::sqrt(self.hi));
        }
        let s = Dd::new(libm::sqrt(self.hi));
        s + (self - s * s) / (s * 2.0)
    }

    fn cosh(self) -> Self {
        let e = self.exp_dd();
        (e + e.recip()) * 0.5
    }

    fn sinh(self) -> Self {
        self.sinh_dd()
    }

    fn tanh(self) -> Self {
        if self.hi.abs() > 40.0 {
            let t = Dd::new(1.0) - (self.abs() * -2.0).exp_dd() * 2.0;
            return if self.hi > 0.0 { t } else { -t };
        }
        self.sinh_dd() / self.cosh()
    }

    fn powf(self, p: f64) -> Self {
        (self.ln_dd() * p).exp_dd()
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn ln_cosh(self) -> Self {
        let a = self.abs();
        if a.hi < 1.0 {
            return self.cosh().ln_dd();
        }
        a + ((a * -2.0).exp_dd() + 1.0).ln_dd() - LN2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: Dd, tol: f64) -> bool {
        let d = a - b;
        d.value().abs() <= tol * b.value().abs().max(1e-300)
    }

    #[test]
    fn arithmetic_keeps_the_low_word() {
        let third = Dd::new(1.0) / Dd::new(3.0);
        let back = third * 3.0;
        assert!(close(back, Dd::new(1.0), 1e-31));
        let tiny = Dd::new(1.0) + Dd::new(1e-20);
        assert_eq!((tiny - 1.0).value(), 1e-20);
    }

    #[test]
    fn transcendentals_are_mutually_consistent() {
        for x in [-3.7, -0.3, 1e-9, 0.05, 0.7, 2.0, 12.5] {
            let d = Dd::new(x);
            assert!(close(d.exp().ln(), d, 1e-29), "{x}");
            let (c, s) = (d.cosh(), d.sinh());
            assert!(close(c * c - s * s, Dd::new(1.0), 1e-28), "{x}");
            assert!(close(d.tanh(), s / c, 1e-30), "{x}");
            assert!(close(d.ln_cosh(), c.ln(), 1e-28), "{x}");
            assert!((d.exp().value() - x.exp()).abs() <= 4e-16 * x.exp());
        }
        let two = Dd::new(2.0);
        let r = two.sqrt();
        assert!(close(r * r, two, 1e-31));
        assert!(close(two.powf(0.5), r, 1e-30));
        assert!(close(Dd::new(2.0).ln(), LN2, 1e-31));
    }

    #[test]
    fn large_arguments_saturate() {
        assert_eq!(Dd::new(60.0).tanh().value(), 1.0);
        assert!(close(Dd::new(300.0).ln_cosh(), Dd::new(300.0) - LN2, 1e-30));
    }
}
