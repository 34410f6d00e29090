//! Tape-based reverse-mode automatic differentiation over scalars.
//!
//! Operations on [`Var`] append a node to a [`Tape`]; each node stores up
//! to two parent indices with their local partial derivatives. A single
//! reverse sweep from the output then accumulates adjoints for every input.
//!
//! ```
//! use icann_core::autodiff::Tape;
//! use icann_core::scalar::Real;
//!
//! let tape = Tape::new();
//! let x = tape.var(3.0);
//! let y = x * x + x.exp();
//! let grads = tape.gradient(y);
//! assert!((grads.wrt(x) - (6.0 + 3.0f64.exp())).abs() < 1e-12);
//! ```
//!
//! Constants are `Var`s without a tape; mixing them with taped values never
//! records a node for the constant side.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::scalar::{ln_cosh_f64, sign0, Real};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    parents: [u32; 2],
    partials: [f64; 2],
}

/// Append-only record of scalar operations.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            nodes: RefCell::new(Vec::with_capacity(n)),
        }
    }

    /// Registers an independent input.
    pub fn var(&self, value: f64) -> Var<'_> {
        let idx = self.push(Node {
            parents: [NONE, NONE],
            partials: [0.0, 0.0],
        });
        Var {
            tape: Some(self),
            idx,
            val: value,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops every recorded node, keeping the allocation.
    pub fn clear(&mut self) {
        self.nodes.get_mut().clear();
    }

    #[inline]
    fn push(&self, node: Node) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len();
        debug_assert!(idx < NONE as usize, "tape overflow");
        nodes.push(node);
        idx as u32
    }

    /// Reverse sweep seeded with `d output / d output = 1`.
    pub fn gradient(&self, output: Var<'_>) -> Gradients {
        let nodes = self.nodes.borrow();
        let mut adjoints = vec![0.0; nodes.len()];
        if output.tape.is_none() {
            return Gradients { adjoints };
        }
        adjoints[output.idx as usize] = 1.0;
        for i in (0..=output.idx as usize).rev() {
            let a = adjoints[i];
            if a == 0.0 {
                continue;
            }
            let node = nodes[i];
            for k in 0..2 {
                let p = node.parents[k];
                if p != NONE {
                    adjoints[p as usize] += node.partials[k] * a;
                }
            }
        }
        Gradients { adjoints }
    }
}

/// Adjoints produced by [`Tape::gradient`].
pub struct Gradients {
    adjoints: Vec<f64>,
}

impl Gradients {
    /// Derivative of the output with respect to `v`; zero for constants.
    pub fn wrt(&self, v: Var<'_>) -> f64 {
        if v.tape.is_none() {
            return 0.0;
        }
        self.adjoints.get(v.idx as usize).copied().unwrap_or(0.0)
    }
}

/// A scalar that records its arithmetic on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    idx: u32,
    val: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tape {
            Some(_) => write!(f, "Var({}#{})", self.val, self.idx),
            None => write!(f, "Const({})", self.val),
        }
    }
}

impl<'t> Var<'t> {
    pub fn constant(val: f64) -> Self {
        Var {
            tape: None,
            idx: NONE,
            val,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.tape.is_none()
    }

    #[inline]
    fn unary(self, val: f64, d: f64) -> Self {
        match self.tape {
            None => Var::constant(val),
            Some(t) => Var {
                tape: Some(t),
                idx: t.push(Node {
                    parents: [self.idx, NONE],
                    partials: [d, 0.0],
                }),
                val,
            },
        }
    }

    #[inline]
    fn binary(self, other: Self, val: f64, da: f64, db: f64) -> Self {
        match (self.tape, other.tape) {
            (None, None) => Var::constant(val),
            (Some(_), None) => self.unary(val, da),
            (None, Some(_)) => other.unary(val, db),
            (Some(t), Some(_)) => Var {
                tape: Some(t),
                idx: t.push(Node {
                    parents: [self.idx, other.idx],
                    partials: [da, db],
                }),
                val,
            },
        }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, self.val + rhs.val, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, self.val - rhs.val, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, self.val * rhs.val, rhs.val, self.val)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.val;
        let q = self.val * inv;
        self.binary(rhs, q, inv, -q * inv)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.unary(-self.val, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        self.unary(self.val + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: f64) -> Self {
        self.unary(self.val - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        self.unary(self.val * rhs, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        self.unary(self.val / rhs, 1.0 / rhs)
    }
}

impl<'t> AddAssign for Var<'t> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<'t> SubAssign for Var<'t> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<'t> MulAssign for Var<'t> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<'t> Real for Var<'t> {
    #[inline]
    fn cst(v: f64) -> Self {
        Var::constant(v)
    }
    #[inline]
    fn value(self) -> f64 {
        self.val
    }
    #[inline]
    fn exp(self) -> Self {
        let e = libm::exp(self.val);
        self.unary(e, e)
    }
    #[inline]
    fn ln(self) -> Self {
        self.unary(libm::log(self.val), 1.0 / self.val)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = libm::sqrt(self.val);
        self.unary(s, 0.5 / s)
    }
    #[inline]
    fn cosh(self) -> Self {
        self.unary(libm::cosh(self.val), libm::sinh(self.val))
    }
    #[inline]
    fn sinh(self) -> Self {
        self.unary(libm::sinh(self.val), libm::cosh(self.val))
    }
    #[inline]
    fn tanh(self) -> Self {
        let t = libm::tanh(self.val);
        self.unary(t, 1.0 - t * t)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        let v = libm::pow(self.val, p);
        self.unary(v, p * libm::pow(self.val, p - 1.0))
    }
    #[inline]
    fn abs(self) -> Self {
        self.unary(libm::fabs(self.val), sign0(self.val))
    }
    #[inline]
    fn ln_cosh(self) -> Self {
        self.unary(ln_cosh_f64(self.val), libm::tanh(self.val))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_example() {
        let tape = Tape::new();
        let x = tape.var(3.0);
        let y = x * x + x.exp();
        let grads = tape.gradient(y);
        assert!((grads.wrt(x) - (6.0 + 3.0f64.exp())).abs() < 1e-12);
    }

    fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6 * x.abs().max(1.0);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        let cases: [(fn(Var) -> Var, fn(f64) -> f64); 8] = [
            (|v| v.exp(), |x| libm::exp(x)),
            (|v| v.ln(), |x| libm::log(x)),
            (|v| v.sqrt(), |x| libm::sqrt(x)),
            (|v| v.cosh(), |x| libm::cosh(x)),
            (|v| v.sinh(), |x| libm::sinh(x)),
            (|v| v.tanh(), |x| libm::tanh(x)),
            (|v| v.powf(-1.0 / 3.0), |x| libm::pow(x, -1.0 / 3.0)),
            (|v| v.ln_cosh(), |x| libm::log(libm::cosh(x))),
        ];
        for (fv, ff) in cases {
            for &x in &[0.3, 1.7, 2.5] {
                let tape = Tape::new();
                let v = tape.var(x);
                let y = fv(v);
                let g = tape.gradient(y).wrt(v);
                let fd = central_diff(ff, x);
                assert!((g - fd).abs() < 1e-7 * fd.abs().max(1.0), "x={x} g={g} fd={fd}");
            }
        }
    }

    #[test]
    fn shared_subexpressions_accumulate() {
        let tape = Tape::new();
        let x = tape.var(2.0);
        let y = tape.var(-0.5);
        let a = x * y;
        let f = a * a / (x + 1.0) - y;
        let g = tape.gradient(f);
        // f = x^2 y^2 / (x+1) - y
        let dfdx = (2.0 * 2.0 * 0.25 * 3.0 - 4.0 * 0.25) / 9.0;
        let dfdy = 2.0 * 4.0 * -0.5 / 3.0 - 1.0;
        assert!((g.wrt(x) - dfdx).abs() < 1e-14);
        assert!((g.wrt(y) - dfdy).abs() < 1e-14);
    }

    #[test]
    fn constants_record_nothing() {
        let tape = Tape::new();
        let x = tape.var(1.0);
        let c = Var::constant(3.0);
        let before = tape.len();
        let k = c * c + c.exp();
        assert!(k.is_constant());
        assert_eq!(tape.len(), before);
        let y = x * c;
        assert_eq!(tape.len(), before + 1);
        assert_eq!(tape.gradient(y).wrt(x), 3.0);
        assert_eq!(tape.gradient(y).wrt(c), 0.0);
    }

    #[test]
    fn abs_kink_has_zero_slope() {
        let tape = Tape::new();
        let x = tape.var(0.0);
        let y = x.abs();
        assert_eq!(tape.gradient(y).wrt(x), 0.0);
    }
}
