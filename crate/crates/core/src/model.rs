//! Generalized Maxwell solid built from energy and potential networks.
//!
//! One step of the recurrent cell, per branch:
//!
//! 1. `D̄ = ∂g/∂Γ̄` with `Γ̄ = Σ̄(C̄e,n)` evaluated at the previous total
//!    deformation `C_n` (explicit scheme);
//! 2. `C_i,n+1 = U_i,n exp(2 Δt D̄) U_i,n` and `U_i,n+1 = √C_i,n+1`;
//! 3. `S_α = 2 U_i⁻¹ ∂ψ/∂C̄e U_i⁻¹ - p_α C⁻¹` at the new `C` with the new
//!    `U_i`, where `p_α` makes the 33-component vanish.
//!
//! The equilibrium spring adds `2 ∂ψ/∂C - p C⁻¹`. The driving stress of the
//! new configuration is exactly the one the next step needs, so the state
//! carries it forward instead of evaluating the energy twice.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::energy::{EnergyVariant, EnergyWeights};
use crate::error::{Error, Result};
use crate::potential::{PotentialVariant, PotentialWeights};
use crate::protocol::LoadPath;
use crate::scalar::Real;
use crate::tensor::SymTensor3;

/// One spring–dashpot element.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxwellBranch<T: Real = f64> {
    pub energy: EnergyWeights<T>,
    pub potential: PotentialWeights<T>,
}

/// Parallel Maxwell branches plus an optional equilibrium spring.
#[derive(Clone, Debug, PartialEq)]
pub struct ViscoSolid<T: Real = f64> {
    pub branches: Vec<MaxwellBranch<T>>,
    pub equilibrium: Option<EnergyWeights<T>>,
}

/// Shape of a [`ViscoSolid`]: what its flat weight vector contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Topology {
    pub branches: usize,
    pub potential: PotentialVariant,
    pub equilibrium: bool,
}

impl Topology {
    /// A single Maxwell element with the reduced potential.
    pub const MAXWELL: Topology = Topology {
        branches: 1,
        potential: PotentialVariant::Reduced,
        equilibrium: false,
    };

    /// Three Maxwell elements and an equilibrium spring.
    pub const GENERALIZED: Topology = Topology {
        branches: 3,
        potential: PotentialVariant::Reduced,
        equilibrium: true,
    };

    pub fn branch_len(&self) -> usize {
        EnergyWeights::<f64>::count(EnergyVariant::Full) + PotentialWeights::<f64>::count(self.potential)
    }

    pub fn len(&self) -> usize {
        let eq = if self.equilibrium {
            EnergyWeights::<f64>::count(EnergyVariant::Equilibrium)
        } else {
            0
        };
        self.branches * self.branch_len() + eq
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat weight names, e.g. `branch1.psi.w2_1`, `branch1.g.w2_7t`,
    /// `eq.psi.w2_1`.
    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.len());
        for b in 1..=self.branches {
            for n in EnergyWeights::<f64>::names(EnergyVariant::Full) {
                out.push(format!("branch{b}.psi.{n}"));
            }
            for n in PotentialWeights::<f64>::names(self.potential) {
                out.push(format!("branch{b}.g.{n}"));
            }
        }
        if self.equilibrium {
            for n in EnergyWeights::<f64>::names(EnergyVariant::Equilibrium) {
                out.push(format!("eq.psi.{n}"));
            }
        }
        out
    }

    /// Whether each flat weight is sign-constrained (`≥ 0`).
    pub fn constrained(&self) -> Vec<bool> {
        self.names().iter().map(|n| !n.ends_with(".psi.w3_1")).collect()
    }
}

/// Recurrent hidden state: per-branch inelastic stretch `U_i` and the total
/// deformation of the previous step.
#[derive(Clone, Debug)]
pub struct MaterialState<T: Real = f64> {
    pub u_i: Vec<SymTensor3<T>>,
    pub c_prev: SymTensor3<f64>,
    /// Driving stress at `U_i⁻¹ C_prev U_i⁻¹`, one per branch.
    gamma: Vec<SymTensor3<T>>,
}

impl<T: Real> MaterialState<T> {
    /// `U_i = I`, `C = I`.
    pub fn virgin(branches: usize) -> Self {
        // every admissible energy has a vanishing driving stress at C̄e = I
        Self {
            u_i: alloc::vec![SymTensor3::identity(); branches],
            c_prev: SymTensor3::identity(),
            gamma: alloc::vec![SymTensor3::zero(); branches],
        }
    }

    /// Cached driving stress of branch `k`.
    pub fn driving_stress(&self, k: usize) -> &SymTensor3<T> {
        &self.gamma[k]
    }
}

/// Per-branch quantities of one step.
#[derive(Clone, Copy, Debug)]
pub struct BranchDiagnostics<T: Real = f64> {
    /// Driving stress `Γ̄` used for the evolution.
    pub gamma: SymTensor3<T>,
    /// Inelastic rate `D̄_i`.
    pub d: SymTensor3<T>,
    /// `Γ̄ : D̄_i`.
    pub dissipation: T,
    /// Branch Lagrange multiplier `p_α`.
    pub pressure: T,
}

#[derive(Clone, Debug)]
pub struct StepOutput<T: Real = f64> {
    /// Second Piola–Kirchhoff stress.
    pub s: SymTensor3<T>,
    pub branches: Vec<BranchDiagnostics<T>>,
    /// Equilibrium-spring Lagrange multiplier (zero without a spring).
    pub pressure: T,
}

/// `C̄e = U_i⁻¹ C U_i⁻¹`.
pub fn corotated_elastic_cg<T: Real>(c: &SymTensor3<T>, u_i: &SymTensor3<T>) -> Result<SymTensor3<T>> {
    Ok(SymTensor3::sandwich(&u_i.inverse()?, c))
}

/// `p` such that `[raw - p C⁻¹]₃₃ = 0`.
pub fn branch_pressure<T: Real>(raw: &SymTensor3<T>, c: &SymTensor3<f64>) -> Result<T> {
    if !c.is_diagonal() || !raw.is_diagonal() {
        return Err(Error::UnsupportedProtocol);
    }
    Ok(raw.get(2, 2) * c.get(2, 2))
}

fn check_finite<T: Real>(a: &SymTensor3<T>) -> Result<()> {
    if a.components().iter().all(|x| x.value().is_finite()) {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite {
            min_eigenvalue: f64::NAN,
        })
    }
}

impl<T: Real> MaxwellBranch<T> {
    /// `Σ̄ = 2 C̄e ∂ψ/∂C̄e`.
    pub fn driving_stress(&self, ce: &SymTensor3<T>) -> Result<SymTensor3<T>> {
        self.energy.driving_stress(ce)
    }

    /// Exponential update of `U_i` driven by `Γ̄`; returns the new stretch
    /// and `D̄_i`.
    pub fn evolve_with(
        &self,
        u_i: &SymTensor3<T>,
        gamma: &SymTensor3<T>,
        dt: f64,
    ) -> Result<(SymTensor3<T>, SymTensor3<T>)> {
        let d = self.potential.flow_direction(gamma)?;
        if dt == 0.0 {
            return Ok((*u_i, d));
        }
        let e = d.scale_f64(2.0 * dt).sym_exp();
        let c_i = SymTensor3::sandwich(u_i, &e);
        check_finite(&c_i)?;
        Ok((c_i.sym_sqrt()?, d))
    }

    /// `U_i,n+1` from `U_i,n` and the previous total deformation `C_n`.
    pub fn evolve_state(&self, u_i: &SymTensor3<T>, c_n: &SymTensor3<f64>, dt: f64) -> Result<SymTensor3<T>> {
        let ce = corotated_elastic_cg(&SymTensor3::lift(c_n), u_i)?;
        let gamma = self.driving_stress(&ce)?;
        Ok(self.evolve_with(u_i, &gamma, dt)?.0)
    }

    /// Branch stress at `c` for the stretch `u_i`, with its pressure, and the
    /// driving stress of that configuration.
    fn stress(
        &self,
        u_i: &SymTensor3<T>,
        c: &SymTensor3<f64>,
        cinv: &SymTensor3<T>,
    ) -> Result<(SymTensor3<T>, T, SymTensor3<T>)> {
        let u_inv = u_i.inverse()?;
        let ce = SymTensor3::sandwich(&u_inv, &SymTensor3::lift(c));
        let r = self.energy.response(&ce)?;
        let raw = SymTensor3::sandwich(&u_inv, &r.dpsi).scale_f64(2.0);
        let p = branch_pressure(&raw, c)?;
        Ok((raw - cinv.scale(p), p, r.sigma))
    }

    pub fn map<U: Real>(&self, mut f: impl FnMut(T) -> U) -> MaxwellBranch<U> {
        MaxwellBranch {
            energy: self.energy.map(&mut f),
            potential: self.potential.map(&mut f),
        }
    }
}

impl<T: Real> ViscoSolid<T> {
    pub fn zeros(top: Topology) -> Self {
        let branch = MaxwellBranch {
            energy: EnergyWeights::zeros(EnergyVariant::Full),
            potential: PotentialWeights::zeros(top.potential),
        };
        Self {
            branches: alloc::vec![branch; top.branches],
            equilibrium: top
                .equilibrium
                .then(|| EnergyWeights::zeros(EnergyVariant::Equilibrium)),
        }
    }

    pub fn topology(&self) -> Topology {
        Topology {
            branches: self.branches.len(),
            potential: self
                .branches
                .first()
                .map_or(PotentialVariant::Reduced, |b| b.potential.variant()),
            equilibrium: self.equilibrium.is_some(),
        }
    }

    /// Weights in [`Topology::names`] order.
    pub fn to_vec(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.topology().len());
        for b in &self.branches {
            v.extend(b.energy.to_vec());
            v.extend(b.potential.to_vec());
        }
        if let Some(eq) = &self.equilibrium {
            v.extend(eq.to_vec());
        }
        v
    }

    pub fn from_slice(top: Topology, w: &[T]) -> Result<Self> {
        if w.len() != top.len() {
            return Err(Error::ShapeMismatch {
                expected: top.len(),
                found: w.len(),
            });
        }
        if top.branches == 0 {
            return Err(Error::invalid("a solid needs at least one branch"));
        }
        let ne = EnergyWeights::<f64>::count(EnergyVariant::Full);
        let nb = top.branch_len();
        let branches = w[..top.branches * nb]
            .chunks(nb)
            .map(|c| {
                Ok(MaxwellBranch {
                    energy: EnergyWeights::from_slice(EnergyVariant::Full, &c[..ne])?,
                    potential: PotentialWeights::from_slice(top.potential, &c[ne..])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let equilibrium = if top.equilibrium {
            Some(EnergyWeights::from_slice(
                EnergyVariant::Equilibrium,
                &w[top.branches * nb..],
            )?)
        } else {
            None
        };
        Ok(Self { branches, equilibrium })
    }

    pub fn map<U: Real>(&self, mut f: impl FnMut(T) -> U) -> ViscoSolid<U> {
        ViscoSolid {
            branches: self.branches.iter().map(|b| b.map(&mut f)).collect(),
            equilibrium: self.equilibrium.as_ref().map(|e| e.map(&mut f)),
        }
    }

    pub fn virgin_state(&self) -> MaterialState<T> {
        MaterialState::virgin(self.branches.len())
    }

    /// State with the given stretches and previous deformation.
    pub fn state_from(&self, u_i: Vec<SymTensor3<T>>, c_prev: SymTensor3<f64>) -> Result<MaterialState<T>> {
        if u_i.len() != self.branches.len() {
            return Err(Error::ShapeMismatch {
                expected: self.branches.len(),
                found: u_i.len(),
            });
        }
        let c = SymTensor3::lift(&c_prev);
        let gamma = self
            .branches
            .iter()
            .zip(&u_i)
            .map(|(b, u)| b.driving_stress(&corotated_elastic_cg(&c, u)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(MaterialState { u_i, c_prev, gamma })
    }

    /// Advances `state` in place to `c_new` and returns the stress.
    fn advance(
        &self,
        state: &mut MaterialState<T>,
        c_new: &SymTensor3<f64>,
        dt: f64,
        mut diag: Option<&mut Vec<BranchDiagnostics<T>>>,
    ) -> Result<(SymTensor3<T>, T), (Error, Option<usize>)> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err((
                Error::invalid(format!("time increment {dt} must be finite and >= 0")),
                None,
            ));
        }
        if !c_new.is_diagonal() {
            return Err((Error::UnsupportedProtocol, None));
        }
        let cinv = SymTensor3::lift(&c_new.inverse().map_err(|e| (e, None))?);
        let mut s = SymTensor3::zero();
        for (k, b) in self.branches.iter().enumerate() {
            let gamma = state.gamma[k];
            let (u, d) = b.evolve_with(&state.u_i[k], &gamma, dt).map_err(|e| (e, Some(k)))?;
            let (sb, p, sigma) = b.stress(&u, c_new, &cinv).map_err(|e| (e, Some(k)))?;
            s = s + sb;
            state.u_i[k] = u;
            state.gamma[k] = sigma;
            if let Some(out) = diag.as_deref_mut() {
                out.push(BranchDiagnostics {
                    gamma,
                    d,
                    dissipation: gamma.ddot(&d),
                    pressure: p,
                });
            }
        }
        let mut p_eq = T::zero();
        if let Some(eq) = &self.equilibrium {
            let raw = eq
                .gradient(&SymTensor3::lift(c_new))
                .map_err(|e| (e, None))?
                .scale_f64(2.0);
            p_eq = branch_pressure(&raw, c_new).map_err(|e| (e, None))?;
            s = s + raw - cinv.scale(p_eq);
        }
        state.c_prev = *c_new;
        Ok((s, p_eq))
    }

    /// One step of the recurrent cell.
    pub fn step(
        &self,
        state: &MaterialState<T>,
        c_new: &SymTensor3<f64>,
        dt: f64,
    ) -> Result<(StepOutput<T>, MaterialState<T>)> {
        let mut next = state.clone();
        let mut diag = Vec::with_capacity(self.branches.len());
        let (s, pressure) = self
            .advance(&mut next, c_new, dt, Some(&mut diag))
            .map_err(|(e, b)| e.at_step(0, b))?;
        Ok((
            StepOutput {
                s,
                branches: diag,
                pressure,
            },
            next,
        ))
    }

    fn fold<R>(
        &self,
        path: &LoadPath,
        mut visit: impl FnMut(&MaterialState<T>, SymTensor3<T>, T, Vec<BranchDiagnostics<T>>) -> R,
        keep_diag: bool,
    ) -> Result<Vec<R>> {
        let mut state = self.virgin_state();
        let mut out = Vec::with_capacity(path.len());
        let mut t_prev = path.times().first().copied().unwrap_or(0.0);
        for k in 0..path.len() {
            let t = path.times()[k];
            let c = path.c(k);
            let mut diag = Vec::new();
            let (s, p) = self
                .advance(&mut state, &c, t - t_prev, keep_diag.then_some(&mut diag))
                .map_err(|(e, b)| e.at_step(k, b))?;
            out.push(visit(&state, s, p, diag));
            t_prev = t;
        }
        Ok(out)
    }

    /// Folds [`Self::step`] over `path` from the virgin state.
    pub fn rollout(&self, path: &LoadPath) -> Result<Vec<StepOutput<T>>> {
        self.fold(
            path,
            |_, s, pressure, branches| StepOutput { s, branches, pressure },
            true,
        )
    }

    /// `S11` along `path`.
    pub fn predict_s11(&self, path: &LoadPath) -> Result<Vec<T>> {
        self.fold(path, |_, s, _, _| s.get(0, 0), false)
    }

    /// States after every step of `path`.
    pub fn states(&self, path: &LoadPath) -> Result<Vec<MaterialState<T>>> {
        self.fold(path, |st, _, _, _| st.clone(), false)
    }
}

impl ViscoSolid<f64> {
    /// Clamps every sign-constrained weight to `≥ 0`.
    pub fn project(&mut self) {
        for b in &mut self.branches {
            b.energy.project();
            b.potential.project();
        }
        if let Some(eq) = &mut self.equilibrium {
            eq.project();
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.branches
            .iter()
            .all(|b| b.energy.is_admissible() && b.potential.is_admissible())
            && self.equilibrium.as_ref().map_or(true, |e| e.is_admissible())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Protocol;

    type S = SymTensor3<f64>;

    fn sample_branch() -> MaxwellBranch {
        MaxwellBranch {
            energy: EnergyWeights::from_slice(
                EnergyVariant::Full,
                &[0.2, 0.1, 0.05, 0.0, 0.5, 3.0, 1.0, 0.2, 0.1, 1.0, 0.3, 0.1, 0.0, 2.0],
            )
            .unwrap(),
            potential: PotentialWeights::from_slice(
                PotentialVariant::Reduced,
                &[0.1, 0.05, 0.2, 0.0, 0.001, 0.002, 0.001, 0.0005, 0.003],
            )
            .unwrap(),
        }
    }

    #[test]
    fn weight_counts() {
        assert_eq!(Topology::GENERALIZED.len(), 81);
        assert_eq!(Topology::MAXWELL.len(), 23);
        let names = Topology::GENERALIZED.names();
        assert_eq!(names[0], "branch1.psi.w1_1");
        assert_eq!(names[14], "branch1.g.w1_1");
        assert_eq!(names[80], "eq.psi.w2_8");
        assert_eq!(Topology::GENERALIZED.constrained().iter().filter(|c| !**c).count(), 3);
    }

    #[test]
    fn flat_round_trip() {
        let v: Vec<f64> = (0..81).map(|k| k as f64 * 0.5).collect();
        let m = ViscoSolid::from_slice(Topology::GENERALIZED, &v).unwrap();
        assert_eq!(m.to_vec(), v);
        assert_eq!(m.topology(), Topology::GENERALIZED);
        assert!(ViscoSolid::from_slice(Topology::GENERALIZED, &v[..80]).is_err());
    }

    #[test]
    fn corotated_examples() {
        let c = S::diag(4.0, 0.5, 0.5);
        assert_eq!(corotated_elastic_cg(&c, &S::identity()).unwrap(), c);
        let u = S::diag(2.0, 0.5f64.sqrt(), 0.5f64.sqrt());
        let ce = corotated_elastic_cg(&c, &u).unwrap();
        assert!((ce - S::identity()).norm() < 1e-15);
        let u = S::diag(1.2, 1.0 / 1.2f64.sqrt(), 1.0 / 1.2f64.sqrt());
        let ce = corotated_elastic_cg(&c, &u).unwrap();
        let ui = u.inverse().unwrap().to_matrix();
        let cm = c.to_matrix();
        let direct = S::from_matrix(&core::array::from_fn(|i| {
            core::array::from_fn(|j| {
                (0..3)
                    .flat_map(|k| (0..3).map(move |l| (k, l)))
                    .map(|(k, l)| ui[i][k] * cm[k][l] * ui[l][j])
                    .sum()
            })
        }));
        assert!((ce - direct).norm() < 1e-15);
        assert!((ce.get(0, 0) - 4.0 / 1.44).abs() < 1e-15);
    }

    #[test]
    fn dt_zero_keeps_stretch() {
        let b = sample_branch();
        let u = S::diag(1.1, 0.95, 1.0 / (1.1 * 0.95));
        assert_eq!(b.evolve_state(&u, &S::diag(1.5, 0.8, 1.0 / 1.2), 0.0).unwrap(), u);
    }

    #[test]
    fn relaxed_isochoric_branch_is_a_fixed_point() {
        let mut b = sample_branch();
        b.energy.vol = Some((0.0, 0.0));
        let u = S::diag(1.2, 1.0 / 1.2f64.sqrt(), 1.0 / 1.2f64.sqrt());
        let u1 = b.evolve_state(&u, &u.square(), 0.1).unwrap();
        assert!((u1 - u).norm() < 1e-15);
    }

    #[test]
    fn virgin_identity_step_is_stress_free() {
        let mut m = ViscoSolid::zeros(Topology::GENERALIZED);
        m.branches[0] = sample_branch();
        m.branches[1] = sample_branch();
        let st = m.virgin_state();
        let (out, next) = m.step(&st, &S::identity(), 0.0).unwrap();
        assert!(out.s.norm() < 1e-14);
        assert_eq!(next.u_i, st.u_i);
    }

    #[test]
    fn pressure_zeroes_the_33_stress() {
        let m = ViscoSolid {
            branches: alloc::vec![sample_branch(), sample_branch()],
            equilibrium: Some(EnergyWeights {
                shape: [0.1, 0.0, 0.2, 0.0],
                scale: [1.0, 0.5, 0.0, 0.0, 0.3, 0.2, 0.0, 0.0],
                vol: None,
            }),
        };
        let path = LoadPath::relaxation(Protocol::Uniaxial, 1.5, 0.5, 2.0, 0.01).unwrap();
        for out in m.rollout(&path).unwrap() {
            assert!(out.s.get(2, 2).abs() <= 1e-10 * out.s.norm().max(1.0));
            for b in &out.branches {
                assert!(b.dissipation >= -1e-12);
            }
        }
    }

    #[test]
    fn cached_driving_stress_matches_recomputation() {
        let b = sample_branch();
        let m = ViscoSolid {
            branches: alloc::vec![b.clone()],
            equilibrium: None,
        };
        let path = LoadPath::relaxation(Protocol::Equibiaxial, 1.3, 0.5, 0.5, 0.05).unwrap();
        for st in m.states(&path).unwrap() {
            let ce = corotated_elastic_cg(&S::lift(&st.c_prev), &st.u_i[0]).unwrap();
            let direct = b.driving_stress(&ce).unwrap();
            assert_eq!(&direct, st.driving_stress(0));
        }
    }

    #[test]
    fn non_coaxial_loading_is_rejected() {
        let m = ViscoSolid {
            branches: alloc::vec![sample_branch()],
            equilibrium: None,
        };
        let c = S::new(1.1, 0.9, 1.0 / 0.99, 0.0, 0.0, 0.01);
        let err = m.step(&m.virgin_state(), &c, 0.01).unwrap_err();
        assert!(matches!(err, Error::Step { ref source, .. } if **source == Error::UnsupportedProtocol));
    }

    #[test]
    fn step_errors_carry_indices() {
        let mut b = sample_branch();
        b.energy.shape[0] = 500.0;
        let m = ViscoSolid {
            branches: alloc::vec![sample_branch(), b],
            equilibrium: None,
        };
        let path = LoadPath::relaxation(Protocol::Uniaxial, 3.0, 0.5, 0.5, 0.1).unwrap();
        match m.predict_s11(&path) {
            Err(Error::Step { step, branch, .. }) => {
                assert!(step > 0);
                assert_eq!(branch, Some(1));
            }
            other => panic!("expected a step error, got {other:?}"),
        }
    }
}
