//! Pseudo-potential network `g(Γ̄)`.
//!
//! Each channel invariant `x ∈ {I1, I1², J2, J2², J3, J3²}` of the driving
//! stress passes through `abs(x)`, `ln cosh(w1 x)` and `cosh(w1 x) - 1`,
//! each scaled by a non-negative `w2`. All activations are convex, even and
//! zero at the origin, so `g ≥ 0`, `g(0) = 0` and the dissipation
//! `Γ̄ : ∂g/∂Γ̄` is non-negative for any admissible weights.
//!
//! The reduced variant keeps only `abs` and `ln cosh` on `I1`, `I1²` and the
//! scaled invariant `J̃2 = 3 J2`.

use alloc::vec::Vec;

use crate::energy::checked;
use crate::error::{Error, Result};
use crate::scalar::{sign0, Real};
use crate::tensor::SymTensor3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialVariant {
    /// 12 shape and 18 scale weights over `I1, J2, J3`.
    Full,
    /// 3 shape and 6 scale weights over `I1` and `J̃2`.
    Reduced,
}

/// Stress invariant feeding one pair of channels (first and second power).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Invariant {
    I1,
    J2,
    J3,
}

/// Weights of `g`.
///
/// Full: `shape[k] = w1_{k+1}` (12), `scale[k] = w2_{k+1}` (18).
/// Reduced: `shape = [w1_1, w1_3, w̃1_5]`, `scale = [w2_1, w2_4, w̃2_7, w2_2, w2_5, w2_8]`,
/// which is also the storage order.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialWeights<T: Real = f64> {
    variant: PotentialVariant,
    pub shape: Vec<T>,
    pub scale: Vec<T>,
}

const REDUCED_NAMES: [&str; 9] = ["w1_1", "w1_3", "w1_5t", "w2_1", "w2_4", "w2_7t", "w2_2", "w2_5", "w2_8"];
const FULL_NAMES: [&str; 30] = [
    "w1_1", "w1_2", "w1_3", "w1_4", "w1_5", "w1_6", "w1_7", "w1_8", "w1_9", "w1_10", "w1_11", "w1_12", "w2_1", "w2_2",
    "w2_3", "w2_4", "w2_5", "w2_6", "w2_7", "w2_8", "w2_9", "w2_10", "w2_11", "w2_12", "w2_13", "w2_14", "w2_15",
    "w2_16", "w2_17", "w2_18",
];

/// Weights of one activation triple; reduced channels have no cosh term.
#[derive(Clone, Copy)]
struct Channel<T> {
    abs: T,
    lncosh: (T, T),
    cosh: Option<(T, T)>,
}

impl<T: Real> Channel<T> {
    /// Value and derivative at `x`.
    fn eval(&self, x: T, term: &'static str) -> Result<(T, T)> {
        let (s, w) = self.lncosh;
        let a = w * x;
        let mut val = self.abs * x.abs() + s * a.ln_cosh();
        let mut der = self.abs * sign0(x.value()) + s * w * a.tanh();
        if let Some((s, w)) = self.cosh {
            let b = w * x;
            checked(b.abs(), term)?;
            val += s * (b.cosh() - 1.0);
            der += s * w * b.sinh();
        }
        Ok((val, der))
    }
}

impl<T: Real> PotentialWeights<T> {
    pub fn zeros(variant: PotentialVariant) -> Self {
        let (ns, nw) = Self::split(variant);
        Self {
            variant,
            shape: alloc::vec![T::zero(); ns],
            scale: alloc::vec![T::zero(); nw],
        }
    }

    fn split(variant: PotentialVariant) -> (usize, usize) {
        match variant {
            PotentialVariant::Full => (12, 18),
            PotentialVariant::Reduced => (3, 6),
        }
    }

    pub fn variant(&self) -> PotentialVariant {
        self.variant
    }

    pub fn count(variant: PotentialVariant) -> usize {
        let (a, b) = Self::split(variant);
        a + b
    }

    pub fn len(&self) -> usize {
        Self::count(self.variant)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn names(variant: PotentialVariant) -> &'static [&'static str] {
        match variant {
            PotentialVariant::Full => &FULL_NAMES,
            PotentialVariant::Reduced => &REDUCED_NAMES,
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        let mut v = self.shape.clone();
        v.extend_from_slice(&self.scale);
        v
    }

    pub fn from_slice(variant: PotentialVariant, w: &[T]) -> Result<Self> {
        let (ns, nw) = Self::split(variant);
        if w.len() != ns + nw {
            return Err(Error::ShapeMismatch {
                expected: ns + nw,
                found: w.len(),
            });
        }
        Ok(Self {
            variant,
            shape: w[..ns].to_vec(),
            scale: w[ns..].to_vec(),
        })
    }

    pub fn map<U: Real>(&self, mut f: impl FnMut(T) -> U) -> PotentialWeights<U> {
        PotentialWeights {
            variant: self.variant,
            shape: self.shape.iter().map(|w| f(*w)).collect(),
            scale: self.scale.iter().map(|w| f(*w)).collect(),
        }
    }

    /// Full-form weights describing the same potential.
    pub fn to_full(&self) -> PotentialWeights<T> {
        match self.variant {
            PotentialVariant::Full => self.clone(),
            PotentialVariant::Reduced => {
                let mut f = Self::zeros(PotentialVariant::Full);
                let (s, w) = (&self.shape, &self.scale);
                f.shape[0] = s[0];
                f.shape[2] = s[1];
                f.shape[4] = s[2] * 3.0;
                f.scale[0] = w[0];
                f.scale[3] = w[1];
                f.scale[6] = w[2] * 3.0;
                f.scale[1] = w[3];
                f.scale[4] = w[4];
                f.scale[7] = w[5];
                f
            }
        }
    }

    /// Activation triple `k` (0..6 full, 0..3 reduced).
    fn channel(&self, k: usize) -> Channel<T> {
        let (s, w) = (&self.shape, &self.scale);
        match self.variant {
            PotentialVariant::Full => Channel {
                abs: w[3 * k],
                lncosh: (w[3 * k + 1], s[2 * k]),
                cosh: Some((w[3 * k + 2], s[2 * k + 1])),
            },
            PotentialVariant::Reduced => Channel {
                abs: w[k],
                lncosh: (w[k + 3], s[k]),
                cosh: None,
            },
        }
    }

    /// Sub-potential of one invariant (both powers) and its derivative,
    /// evaluated at the invariant value `x`.
    pub fn sub_potential(&self, inv: Invariant, x: T) -> Result<(T, T)> {
        let (k, names) = match (inv, self.variant) {
            (Invariant::I1, _) => (0, ["g: cosh(w1_2 I1)", "g: cosh(w1_4 I1^2)"]),
            (Invariant::J2, PotentialVariant::Full) => (2, ["g: cosh(w1_6 J2)", "g: cosh(w1_8 J2^2)"]),
            (Invariant::J3, PotentialVariant::Full) => (4, ["g: cosh(w1_10 J3)", "g: cosh(w1_12 J3^2)"]),
            (Invariant::J2, PotentialVariant::Reduced) => {
                // single channel on J̃2 = 3 J2
                let (v, d) = self.channel(2).eval(x * 3.0, "g")?;
                return Ok((v, d * 3.0));
            }
            (Invariant::J3, PotentialVariant::Reduced) => return Ok((T::zero(), T::zero())),
        };
        let (v1, d1) = self.channel(k).eval(x, names[0])?;
        let (v2, d2) = self.channel(k + 1).eval(x * x, names[1])?;
        Ok((v1 + v2, d1 + d2 * x * 2.0))
    }

    /// `g(Γ̄)`.
    pub fn eval(&self, gamma: &SymTensor3<T>) -> Result<T> {
        let mut g =
            self.sub_potential(Invariant::I1, gamma.trace())?.0 + self.sub_potential(Invariant::J2, gamma.j2())?.0;
        if self.variant == PotentialVariant::Full {
            g += self.sub_potential(Invariant::J3, gamma.j3())?.0;
        }
        Ok(g)
    }

    /// Scalar derivatives `(∂g/∂I1, ∂g/∂J2, ∂g/∂J3)`.
    pub fn channel_derivatives(&self, gamma: &SymTensor3<T>) -> Result<[T; 3]> {
        let g3 = match self.variant {
            PotentialVariant::Full => self.sub_potential(Invariant::J3, gamma.j3())?.1,
            PotentialVariant::Reduced => T::zero(),
        };
        Ok([
            self.sub_potential(Invariant::I1, gamma.trace())?.1,
            self.sub_potential(Invariant::J2, gamma.j2())?.1,
            g3,
        ])
    }

    /// `∂g/∂Γ̄ = g1' I + g2' dev Γ̄ + g3' dev((dev Γ̄)²)`.
    pub fn flow_direction(&self, gamma: &SymTensor3<T>) -> Result<SymTensor3<T>> {
        let [g1, g2, g3] = self.channel_derivatives(gamma)?;
        let s = gamma.dev();
        let mut d = SymTensor3::identity().scale(g1) + s.scale(g2);
        if self.variant == PotentialVariant::Full {
            d = d + s.square().dev().scale(g3);
        }
        Ok(d)
    }
}

impl PotentialWeights<f64> {
    pub fn project(&mut self) {
        for w in self.shape.iter_mut().chain(self.scale.iter_mut()) {
            *w = w.max(0.0);
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.shape.iter().chain(self.scale.iter()).all(|w| *w >= 0.0)
    }

    /// Whether any weight of the `I1` channels is non-zero.
    pub fn has_volumetric_flow(&self) -> bool {
        let f = self.to_full();
        f.scale[..6].iter().any(|w| *w != 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = SymTensor3<f64>;

    fn full_sample() -> PotentialWeights {
        let w: Vec<f64> = (0..30).map(|k| 0.05 + 0.037 * ((k * 7) % 11) as f64).collect();
        PotentialWeights::from_slice(PotentialVariant::Full, &w).unwrap()
    }

    fn reduced_sample() -> PotentialWeights {
        PotentialWeights::from_slice(
            PotentialVariant::Reduced,
            &[0.4, 0.2, 0.3, 0.1, 0.05, 0.2, 0.3, 0.15, 0.25],
        )
        .unwrap()
    }

    #[test]
    fn single_weight_oracle() {
        let mut w = PotentialWeights::zeros(PotentialVariant::Reduced);
        w.scale[2] = 0.00107837;
        let gamma = S::diag(1.0, -0.5, -0.5);
        // J2 = 1/2 (1 + 1/4 + 1/4) = 0.75, J̃2 = 2.25
        assert!((w.eval(&gamma).unwrap() - 0.00107837 * 2.25).abs() < 1e-17);
    }

    #[test]
    fn zero_at_origin() {
        for w in [full_sample(), reduced_sample()] {
            assert_eq!(w.eval(&S::zero()).unwrap(), 0.0);
            assert_eq!(w.flow_direction(&S::zero()).unwrap(), S::zero());
        }
    }

    #[test]
    fn reduced_matches_full_embedding() {
        let r = reduced_sample();
        let f = r.to_full();
        for g in [S::diag(0.3, -0.2, 0.5), S::new(0.1, 0.4, -0.3, 0.2, -0.1, 0.05)] {
            assert!((r.eval(&g).unwrap() - f.eval(&g).unwrap()).abs() < 1e-14);
            let d = r.flow_direction(&g).unwrap() - f.flow_direction(&g).unwrap();
            assert!(d.norm() < 1e-14);
        }
    }

    #[test]
    fn deviatoric_input_gives_deviatoric_flow() {
        let d = reduced_sample().flow_direction(&S::diag(1.0, -0.4, -0.6)).unwrap();
        assert!(d.trace().abs() < 1e-15);
    }

    #[test]
    fn flow_matches_finite_differences() {
        for w in [full_sample(), reduced_sample()] {
            let g = S::new(0.4, -0.3, 0.7, 0.2, -0.15, 0.1);
            let d = w.flow_direction(&g).unwrap();
            let h = 1e-6;
            for k in 0..6 {
                let mut c = [0.0; 6];
                c[k] = 1.0;
                let e = S::new(c[0], c[1], c[2], c[3], c[4], c[5]);
                let fd = (w.eval(&(g + e.scale_f64(h))).unwrap() - w.eval(&(g - e.scale_f64(h))).unwrap()) / (2.0 * h);
                let an = d.ddot(&e);
                assert!((an - fd).abs() < 1e-6 * fd.abs().max(1.0), "k={k} {an} {fd}");
            }
        }
    }

    #[test]
    fn cosh_overflow_is_reported() {
        let mut w = PotentialWeights::zeros(PotentialVariant::Full);
        w.shape[1] = 100.0;
        w.scale[2] = 1.0;
        assert!(matches!(
            w.eval(&S::diag(1.0, 0.0, 0.0)),
            Err(Error::ActivationOverflow { .. })
        ));
    }

    #[test]
    fn volumetric_flow_detection() {
        let mut w = PotentialWeights::zeros(PotentialVariant::Reduced);
        w.scale[2] = 1.0;
        assert!(!w.has_volumetric_flow());
        w.scale[1] = 1e-3;
        assert!(w.has_volumetric_flow());
    }
}
