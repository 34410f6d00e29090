//! Helmholtz free energy network.
//!
//! The isochoric part is a sum of eight terms on `x = Ĩ1 - 3` and
//! `y = Ĩ2 - 3` (linear and `exp(·) - 1` activations on the first and
//! second power of each), and the volumetric part is Ogden's
//! `W(I3) = I3^(-w3_1) - 1 + w3_1 ln I3` scaled by `w3_2`:
//!
//! ```text
//! ψ = w2_1 x + w2_2 (exp(w1_1 x) - 1) + w2_3 x² + w2_4 (exp(w1_2 x²) - 1)
//!   + w2_5 y + w2_6 (exp(w1_3 y) - 1) + w2_7 y² + w2_8 (exp(w1_4 y²) - 1)
//!   + w3_2 W(I3)
//! ```
//!
//! The equilibrium variant feeds the unmodified `I1, I2` of its argument and
//! has no volumetric term.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::SymTensor3;

/// Exponential and hyperbolic activation inputs above this are rejected.
pub const ACTIVATION_LIMIT: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyVariant {
    /// Isochoric terms on `Ĩ1, Ĩ2` plus the volumetric term.
    Full,
    /// Isochoric terms on `I1, I2`, no volumetric term.
    Equilibrium,
}

/// Weights of ψ. `shape[k]` is `w1_{k+1}`, `scale[k]` is `w2_{k+1}`, `vol`
/// is `(w3_1, w3_2)` and is present only for the full variant.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyWeights<T: Real = f64> {
    pub shape: [T; 4],
    pub scale: [T; 8],
    pub vol: Option<(T, T)>,
}

/// Flat storage order, matching the published weight tables.
const FULL_NAMES: [&str; 14] = [
    "w1_1", "w1_3", "w1_2", "w1_4", "w3_1", "w2_1", "w2_5", "w2_3", "w2_7", "w2_2", "w2_6", "w2_4", "w2_8", "w3_2",
];
const EQ_NAMES: [&str; 12] = [
    "w1_1", "w1_3", "w1_2", "w1_4", "w2_1", "w2_5", "w2_3", "w2_7", "w2_2", "w2_6", "w2_4", "w2_8",
];

/// `∂ψ/∂C` together with the driving stress `2 C ∂ψ/∂C`.
#[derive(Clone, Copy, Debug)]
pub struct EnergyResponse<T: Real = f64> {
    pub dpsi: SymTensor3<T>,
    pub sigma: SymTensor3<T>,
}

impl<T: Real> EnergyWeights<T> {
    pub fn zeros(variant: EnergyVariant) -> Self {
        let z = T::zero();
        Self {
            shape: [z; 4],
            scale: [z; 8],
            vol: match variant {
                EnergyVariant::Full => Some((z, z)),
                EnergyVariant::Equilibrium => None,
            },
        }
    }

    pub fn variant(&self) -> EnergyVariant {
        if self.vol.is_some() {
            EnergyVariant::Full
        } else {
            EnergyVariant::Equilibrium
        }
    }

    pub fn len(&self) -> usize {
        Self::count(self.variant())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn count(variant: EnergyVariant) -> usize {
        match variant {
            EnergyVariant::Full => 14,
            EnergyVariant::Equilibrium => 12,
        }
    }

    /// Weight names in storage order.
    pub fn names(variant: EnergyVariant) -> &'static [&'static str] {
        match variant {
            EnergyVariant::Full => &FULL_NAMES,
            EnergyVariant::Equilibrium => &EQ_NAMES,
        }
    }

    /// Whether each stored weight is restricted to `≥ 0`.
    pub fn constrained(variant: EnergyVariant) -> impl Iterator<Item = bool> {
        Self::names(variant).iter().map(|n| *n != "w3_1")
    }

    /// Weights in storage order.
    pub fn to_vec(&self) -> Vec<T> {
        let [a1, a2, a3, a4] = self.shape;
        let [b1, b2, b3, b4, b5, b6, b7, b8] = self.scale;
        let mut v = Vec::with_capacity(14);
        v.extend_from_slice(&[a1, a3, a2, a4]);
        if let Some((w31, _)) = self.vol {
            v.push(w31);
        }
        v.extend_from_slice(&[b1, b5, b3, b7, b2, b6, b4, b8]);
        if let Some((_, w32)) = self.vol {
            v.push(w32);
        }
        v
    }

    /// Inverse of [`Self::to_vec`].
    pub fn from_slice(variant: EnergyVariant, w: &[T]) -> Result<Self> {
        let n = Self::count(variant);
        if w.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: w.len(),
            });
        }
        let (vol, s) = match variant {
            EnergyVariant::Full => (Some((w[4], w[13])), 5),
            EnergyVariant::Equilibrium => (None, 4),
        };
        Ok(Self {
            shape: [w[0], w[2], w[1], w[3]],
            scale: [
                w[s],
                w[s + 4],
                w[s + 2],
                w[s + 6],
                w[s + 1],
                w[s + 5],
                w[s + 3],
                w[s + 7],
            ],
            vol,
        })
    }

    pub fn map<U: Real>(&self, mut f: impl FnMut(T) -> U) -> EnergyWeights<U> {
        EnergyWeights {
            shape: self.shape.map(&mut f),
            scale: self.scale.map(&mut f),
            vol: self.vol.map(|(a, b)| (f(a), f(b))),
        }
    }

    /// `(x, y, I1, I2, I3)` with `x, y` the shifted channel invariants.
    fn arguments(&self, c: &SymTensor3<T>) -> Result<(T, T, T, T, T)> {
        let i1 = c.trace();
        let i2 = c.i2();
        match self.variant() {
            EnergyVariant::Full => {
                let i3 = c.det();
                if i3.value() <= 0.0 {
                    return Err(Error::NonPositiveVolume { i3: i3.value() });
                }
                let j13 = i3.powf(-1.0 / 3.0);
                Ok((i1 * j13 - 3.0, i2 * j13 * j13 - 3.0, i1, i2, i3))
            }
            EnergyVariant::Equilibrium => Ok((i1 - 3.0, i2 - 3.0, i1, i2, T::one())),
        }
    }

    /// Isochoric part for one invariant: value and derivative in `x`.
    fn iso_channel(shape: [T; 2], scale: [T; 4], x: T, names: [&'static str; 2]) -> Result<(T, T)> {
        let x2 = x * x;
        let a = checked(shape[0] * x, names[0])?;
        let b = checked(shape[1] * x2, names[1])?;
        let ea = a.exp();
        let eb = b.exp();
        let val = scale[0] * x + scale[1] * (ea - 1.0) + scale[2] * x2 + scale[3] * (eb - 1.0);
        let der = scale[0] + scale[1] * shape[0] * ea + (scale[2] + scale[3] * shape[1] * eb) * x * 2.0;
        Ok((val, der))
    }

    fn isochoric(&self, x: T, y: T) -> Result<((T, T), (T, T))> {
        let s = &self.shape;
        let w = &self.scale;
        let px = Self::iso_channel([s[0], s[1]], [w[0], w[1], w[2], w[3]], x, ["w1_1", "w1_2"])?;
        let py = Self::iso_channel([s[2], s[3]], [w[4], w[5], w[6], w[7]], y, ["w1_3", "w1_4"])?;
        Ok((px, py))
    }

    /// `W(I3)` scaled by `w3_2`, and its derivative in `I3`.
    fn volumetric(w31: T, w32: T, i3: T) -> Result<(T, T)> {
        let ln3 = i3.ln();
        let p = checked(-(w31 * ln3), "w3_1")?.exp();
        let val = w32 * (p - 1.0 + w31 * ln3);
        let der = w32 * w31 * (T::one() - p) / i3;
        Ok((val, der))
    }

    /// ψ at `c` (`C̄e` for the full variant, `C` for the equilibrium one).
    pub fn energy(&self, c: &SymTensor3<T>) -> Result<T> {
        let (x, y, _, _, i3) = self.arguments(c)?;
        self.energy_of_shifted(x, y, i3)
    }

    /// ψ from its channel invariants: `Ĩ1, Ĩ2, I3` for the full variant,
    /// `I1, I2` (and `I3` ignored) for the equilibrium one.
    pub fn energy_of_invariants(&self, i1: T, i2: T, i3: T) -> Result<T> {
        if self.vol.is_some() && i3.value() <= 0.0 {
            return Err(Error::NonPositiveVolume { i3: i3.value() });
        }
        self.energy_of_shifted(i1 - 3.0, i2 - 3.0, i3)
    }

    fn energy_of_shifted(&self, x: T, y: T, i3: T) -> Result<T> {
        let ((px, _), (py, _)) = self.isochoric(x, y)?;
        let mut psi = px + py;
        if let Some((w31, w32)) = self.vol {
            psi += Self::volumetric(w31, w32, i3)?.0;
        }
        Ok(psi)
    }

    /// `∂ψ/∂c` and the driving stress `2 c ∂ψ/∂c`.
    pub fn response(&self, c: &SymTensor3<T>) -> Result<EnergyResponse<T>> {
        let (x, y, i1, i2, i3) = self.arguments(c)?;
        let ((_, d1), (_, d2)) = self.isochoric(x, y)?;
        let id = SymTensor3::<T>::identity();
        let dpsi = match self.vol {
            None => id.scale(d1) + (id.scale(i1) - *c).scale(d2),
            Some((w31, w32)) => {
                let (_, dw) = Self::volumetric(w31, w32, i3)?;
                let cinv = c.inverse()?;
                let j13 = i3.powf(-1.0 / 3.0);
                let j23 = j13 * j13;
                // ∂Ĩ1/∂C = I3^(-1/3) (I - I1/3 C⁻¹), ∂Ĩ2/∂C = I3^(-2/3) (I1 I - C - 2/3 I2 C⁻¹)
                let di1 = (id - cinv.scale(i1 / 3.0)).scale(j13);
                let di2 = (id.scale(i1) - *c - cinv.scale(i2 * (2.0 / 3.0))).scale(j23);
                di1.scale(d1) + di2.scale(d2) + cinv.scale(dw * i3)
            }
        };
        let sigma = c.sym_product(&dpsi).scale_f64(2.0);
        Ok(EnergyResponse { dpsi, sigma })
    }

    /// `∂ψ/∂c`.
    pub fn gradient(&self, c: &SymTensor3<T>) -> Result<SymTensor3<T>> {
        Ok(self.response(c)?.dpsi)
    }

    /// `2 c ∂ψ/∂c`.
    pub fn driving_stress(&self, c: &SymTensor3<T>) -> Result<SymTensor3<T>> {
        Ok(self.response(c)?.sigma)
    }
}

impl EnergyWeights<f64> {
    /// Sets every constrained weight to `max(w, 0)`.
    pub fn project(&mut self) {
        for w in self.shape.iter_mut().chain(self.scale.iter_mut()) {
            *w = w.max(0.0);
        }
        if let Some((_, w32)) = self.vol.as_mut() {
            *w32 = w32.max(0.0);
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.shape.iter().chain(self.scale.iter()).all(|w| *w >= 0.0) && self.vol.map_or(true, |(_, w32)| w32 >= 0.0)
    }
}

#[inline]
pub(crate) fn checked<T: Real>(arg: T, term: &'static str) -> Result<T> {
    let v = arg.value();
    if v > ACTIVATION_LIMIT || v.is_nan() {
        return Err(Error::ActivationOverflow { term, arg: v });
    }
    Ok(arg)
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = SymTensor3<f64>;

    fn random_like() -> EnergyWeights {
        EnergyWeights::from_slice(
            EnergyVariant::Full,
            &[0.3, 0.2, 0.1, 0.4, 1.5, 2.0, 0.7, 0.5, 0.3, 1.1, 0.6, 0.2, 0.8, 3.0],
        )
        .unwrap()
    }

    fn fd_gradient(w: &EnergyWeights, c: &S) -> [f64; 3] {
        let d = c.diagonal_values();
        core::array::from_fn(|k| {
            let h = 1e-6;
            let mut p = d;
            let mut m = d;
            p[k] += h;
            m[k] -= h;
            (w.energy(&S::from_diag(p)).unwrap() - w.energy(&S::from_diag(m)).unwrap()) / (2.0 * h)
        })
    }

    #[test]
    fn storage_order_round_trips() {
        let v: Vec<f64> = (0..14).map(|k| k as f64).collect();
        let w = EnergyWeights::from_slice(EnergyVariant::Full, &v).unwrap();
        assert_eq!(w.to_vec(), v);
        assert_eq!(w.shape, [0.0, 2.0, 1.0, 3.0]);
        assert_eq!(w.scale[0], 5.0); // w2_1
        assert_eq!(w.scale[4], 6.0); // w2_5
        assert_eq!(w.vol, Some((4.0, 13.0)));
        let e: Vec<f64> = (0..12).map(|k| k as f64).collect();
        let we = EnergyWeights::from_slice(EnergyVariant::Equilibrium, &e).unwrap();
        assert_eq!(we.to_vec(), e);
        assert!(EnergyWeights::from_slice(EnergyVariant::Full, &e).is_err());
    }

    #[test]
    fn vanishes_at_identity() {
        let w = random_like();
        assert_eq!(w.energy(&S::identity()).unwrap(), 0.0);
        let r = w.response(&S::identity()).unwrap();
        assert!(r.sigma.norm() < 1e-14);
        assert!(r.dpsi.dev().norm() < 1e-14);
    }

    #[test]
    fn single_linear_term() {
        let mut w = EnergyWeights::zeros(EnergyVariant::Full);
        w.scale[0] = 1.0;
        // diag(t, 1/√t, 1/√t) has Ĩ1 = t + 2/√t; solve for Ĩ1 = 4
        let mut t = 3.5f64;
        for _ in 0..60 {
            let f = t + 2.0 / t.sqrt() - 4.0;
            let df = 1.0 - t.powf(-1.5);
            t -= f / df;
        }
        let c = S::diag(t, 1.0 / t.sqrt(), 1.0 / t.sqrt());
        assert!((w.energy(&c).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let w = random_like();
        for c in [
            S::diag(1.1, 0.95, 0.97),
            S::diag(0.8, 1.3, 1.05),
            S::diag(1.4, 0.9, 0.7),
        ] {
            let g = w.gradient(&c).unwrap().diagonal_values();
            let fd = fd_gradient(&w, &c);
            for k in 0..3 {
                assert!((g[k] - fd[k]).abs() < 1e-6 * fd[k].abs().max(1.0), "{g:?} {fd:?}");
            }
        }
        let mut eq = EnergyWeights::zeros(EnergyVariant::Equilibrium);
        eq.shape = [0.2, 0.1, 0.3, 0.05];
        eq.scale = [1.0, 0.5, 0.2, 0.1, 0.4, 0.3, 0.2, 0.1];
        let c = S::diag(1.2, 0.9, 0.93);
        let g = eq.gradient(&c).unwrap().diagonal_values();
        let fd = fd_gradient(&eq, &c);
        for k in 0..3 {
            assert!((g[k] - fd[k]).abs() < 1e-6 * fd[k].abs().max(1.0));
        }
    }

    #[test]
    fn general_tensor_gradient_is_symmetric_derivative() {
        let w = random_like();
        let c = S::new(1.2, 0.9, 1.05, 0.05, -0.03, 0.08);
        let g = w.gradient(&c).unwrap();
        // directional derivative along a symmetric perturbation E: ψ' = ∂ψ/∂C : E
        let e = S::new(0.3, -0.1, 0.2, 0.4, 0.1, -0.2);
        let h = 1e-6;
        let fd = (w.energy(&(c + e.scale_f64(h))).unwrap() - w.energy(&(c - e.scale_f64(h))).unwrap()) / (2.0 * h);
        assert!((g.ddot(&e) - fd).abs() < 1e-7);
        // 2 C ∂ψ/∂C is symmetric for an isotropic ψ
        let m = c.matmul(&g);
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - m[j][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        let mut w = EnergyWeights::zeros(EnergyVariant::Full);
        w.shape[0] = 100.0;
        let c = S::diag(3.0, 1.0 / 3.0f64.sqrt(), 1.0 / 3.0f64.sqrt());
        assert!(matches!(w.energy(&c), Err(Error::ActivationOverflow { .. })));
    }

    #[test]
    fn non_positive_volume_is_rejected() {
        let w = random_like();
        assert!(matches!(
            w.energy(&S::diag(-1.0, 1.0, 1.0)),
            Err(Error::NonPositiveVolume { .. })
        ));
    }

    #[test]
    fn projection_exempts_volumetric_exponent() {
        let mut w = random_like();
        w.vol = Some((-0.5, -1.0));
        w.scale[2] = -0.1;
        w.project();
        assert_eq!(w.vol, Some((-0.5, 0.0)));
        assert_eq!(w.scale[2], 0.0);
        assert!(w.is_admissible());
        let c: Vec<bool> = EnergyWeights::<f64>::constrained(EnergyVariant::Full).collect();
        assert_eq!(c.iter().filter(|b| !**b).count(), 1);
        assert!(!c[4]);
    }
}
