//! Randomized property suites: thermodynamic consistency, the determinant
//! identity of the exponential integrator, and gradient fidelity.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{EnergyVariant, EnergyWeights};
use crate::error::Result;
use crate::model::{MaxwellBranch, Topology, ViscoSolid};
use crate::potential::{Invariant, PotentialVariant, PotentialWeights};
use crate::protocol::{Dataset, LoadPath, Protocol};
use crate::tensor::SymTensor3;
use crate::training::Objective;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    AtLeast(f64),
    AtMost(f64),
}

impl Bound {
    fn holds(self, x: f64) -> bool {
        match self {
            Bound::AtLeast(b) => x >= b,
            Bound::AtMost(b) => x <= b,
        }
    }
}

/// Outcome of one property: the worst value seen against its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub instances: usize,
    pub evaluations: usize,
    pub worst: f64,
    pub bound: Bound,
}

impl Check {
    fn new(name: &str, bound: Bound) -> Self {
        let worst = match bound {
            Bound::AtLeast(_) => f64::INFINITY,
            Bound::AtMost(_) => f64::NEG_INFINITY,
        };
        Self {
            name: name.into(),
            instances: 0,
            evaluations: 0,
            worst,
            bound,
        }
    }

    fn record(&mut self, x: f64) {
        self.evaluations += 1;
        self.worst = match self.bound {
            Bound::AtLeast(_) => self.worst.min(x),
            Bound::AtMost(_) => self.worst.max(x),
        };
        if x.is_nan() {
            self.worst = f64::NAN;
        }
    }

    pub fn passed(&self) -> bool {
        self.evaluations > 0 && self.bound.holds(self.worst)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, b) = match self.bound {
            Bound::AtLeast(b) => (">=", b),
            Bound::AtMost(b) => ("<=", b),
        };
        write!(
            f,
            "{} {}: worst {:e} (required {op} {:e}) over {} instances, {} evaluations",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            b,
            self.instances,
            self.evaluations
        )
    }
}

/// Random admissible energy weights of moderate stiffness.
pub fn random_energy(rng: &mut impl Rng, variant: EnergyVariant) -> EnergyWeights {
    let mut e = EnergyWeights::zeros(variant);
    for w in e.shape.iter_mut() {
        *w = rng.gen::<f64>() * 0.2;
    }
    for w in e.scale.iter_mut() {
        *w = rng.gen::<f64>();
    }
    if let Some(v) = e.vol.as_mut() {
        *v = (rng.gen_range(-1.0..1.0), rng.gen::<f64>() * 2.0);
    }
    e
}

/// Largest `|I1|`, `J2` and `|J3|` reachable with driving-stress components
/// in `[-10, 10]`.
const REACH: [f64; 3] = [30.0, 450.0, 3675.0];

/// Random admissible potential weights; with `volumetric = false` the `I1`
/// channels are switched off. Full-form shape weights are scaled so that no
/// activation overflows within [`REACH`].
pub fn random_potential(rng: &mut impl Rng, variant: PotentialVariant, volumetric: bool) -> PotentialWeights {
    let mut g = PotentialWeights::zeros(variant);
    match variant {
        PotentialVariant::Full => {
            for k in 0..6 {
                let r = if k % 2 == 0 {
                    REACH[k / 2]
                } else {
                    REACH[k / 2] * REACH[k / 2]
                };
                g.shape[2 * k] = rng.gen::<f64>() * 5.0 / r;
                g.shape[2 * k + 1] = rng.gen::<f64>() * 40.0 / r;
            }
        }
        PotentialVariant::Reduced => {
            for w in g.shape.iter_mut() {
                *w = rng.gen::<f64>();
            }
        }
    }
    for w in g.scale.iter_mut() {
        *w = rng.gen::<f64>() * 0.05;
    }
    if !volumetric {
        let i1 = match variant {
            PotentialVariant::Full => &[0usize, 1, 2, 3, 4, 5][..],
            PotentialVariant::Reduced => &[0usize, 1, 3, 4][..],
        };
        for k in i1 {
            g.scale[*k] = 0.0;
        }
    }
    g
}

pub fn random_solid(rng: &mut impl Rng, top: Topology, volumetric: bool) -> ViscoSolid {
    ViscoSolid {
        branches: (0..top.branches)
            .map(|_| MaxwellBranch {
                energy: random_energy(rng, EnergyVariant::Full),
                potential: random_potential(rng, top.potential, volumetric),
            })
            .collect(),
        equilibrium: top.equilibrium.then(|| random_energy(rng, EnergyVariant::Equilibrium)),
    }
}

/// Random piecewise-linear path with `steps` increments.
pub fn random_path(rng: &mut impl Rng, steps: usize) -> Result<LoadPath> {
    random_path_with(rng, steps, 0.005..0.05)
}

/// [`random_path`] with the time increment drawn from `dt`.
pub fn random_path_with(rng: &mut impl Rng, steps: usize, dt: core::ops::Range<f64>) -> Result<LoadPath> {
    let protocol = [Protocol::Uniaxial, Protocol::Equibiaxial, Protocol::PureShear][rng.gen_range(0..3)];
    let dt = rng.gen_range(dt);
    let span = dt * steps as f64;
    let segments = rng.gen_range(1..4);
    let mut knots: Vec<(f64, f64)> = (1..=segments)
        .map(|k| (span * k as f64 / segments as f64, rng.gen_range(0.6..2.0)))
        .collect();
    knots.last_mut().expect("at least one segment").0 = span;
    LoadPath::cyclic(protocol, &knots, dt)
}

/// Settings shared by the suites.
#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    pub seed: u64,
    pub instances: usize,
    pub steps: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 1000,
            steps: 60,
        }
    }
}

fn random_topology(rng: &mut impl Rng) -> Topology {
    Topology {
        branches: rng.gen_range(1..4),
        potential: if rng.gen_bool(0.5) {
            PotentialVariant::Reduced
        } else {
            PotentialVariant::Full
        },
        equilibrium: rng.gen_bool(0.5),
    }
}

fn random_gamma(rng: &mut impl Rng) -> SymTensor3 {
    let mut c = || rng.gen_range(-10.0..10.0);
    SymTensor3::new(c(), c(), c(), c(), c(), c())
}

/// Dissipation, `g(0) = 0`, `g ≥ 0`, derivative–sign agreement and ray
/// convexity of every scalar channel.
pub fn thermodynamics(cfg: &CheckConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dissipation = Check::new("dissipation per step and branch", Bound::AtLeast(-1e-12));
    let mut origin = Check::new("|g(0)|", Bound::AtMost(0.0));
    let mut nonneg = Check::new("g over sampled driving stresses", Bound::AtLeast(0.0));
    let mut sign = Check::new("x g'(x) per channel", Bound::AtLeast(0.0));
    let mut convex = Check::new("channel second differences", Bound::AtLeast(-1e-9));
    for _ in 0..cfg.instances {
        let top = random_topology(&mut rng);
        let volumetric = rng.gen_bool(0.5);
        let solid = random_solid(&mut rng, top, volumetric);
        let path = random_path(&mut rng, cfg.steps)?;
        for out in solid.rollout(&path)? {
            for b in &out.branches {
                dissipation.record(b.dissipation);
            }
        }
        dissipation.instances += 1;

        for b in &solid.branches {
            let g = &b.potential;
            origin.record(g.eval(&SymTensor3::zero())?.abs());
            for _ in 0..8 {
                nonneg.record(g.eval(&random_gamma(&mut rng))?);
            }
            let invariants: &[Invariant] = match top.potential {
                PotentialVariant::Full => &[Invariant::I1, Invariant::J2, Invariant::J3],
                PotentialVariant::Reduced => &[Invariant::I1, Invariant::J2],
            };
            for &inv in invariants {
                let reach = match inv {
                    Invariant::I1 => REACH[0],
                    Invariant::J2 => REACH[1],
                    Invariant::J3 => REACH[2],
                };
                let h = reach / 65.0;
                for k in -64..=64 {
                    let x = h * k as f64;
                    let (v, d) = g.sub_potential(inv, x)?;
                    sign.record(x * d);
                    if d != 0.0 && x != 0.0 && (d > 0.0) != (x > 0.0) {
                        sign.record(f64::NEG_INFINITY);
                    }
                    let (vp, _) = g.sub_potential(inv, x + h)?;
                    let (vm, _) = g.sub_potential(inv, x - h)?;
                    convex.record(vp - 2.0 * v + vm);
                }
            }
        }
        origin.instances += 1;
        nonneg.instances += 1;
        sign.instances += 1;
        convex.instances += 1;
    }
    Ok(alloc::vec![dissipation, origin, nonneg, sign, convex])
}

fn det_ci(u: &SymTensor3) -> f64 {
    let d = u.det();
    d * d
}

/// `det C_i` conservation without `I1` flow and the per-step update
/// `det C_i,n+1 = exp(6 Δt g1') det C_i,n` with it.
pub fn determinant_identity(cfg: &CheckConfig, rollout_steps: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
    let mut conserved = Check::new("|det C_i - det C_i,0| without I1 flow", Bound::AtMost(1e-9));
    let mut update = Check::new("relative error of the det C_i update", Bound::AtMost(1e-9));
    for i in 0..cfg.instances {
        let volumetric = i % 2 == 1;
        let top = Topology {
            branches: rng.gen_range(1..4),
            potential: if rng.gen_bool(0.5) {
                PotentialVariant::Reduced
            } else {
                PotentialVariant::Full
            },
            equilibrium: false,
        };
        let solid = random_solid(&mut rng, top, volumetric);
        let path = random_path(&mut rng, rollout_steps)?;
        let mut state = solid.virgin_state();
        let mut t_prev = path.times()[0];
        for k in 0..path.len() {
            let dt = path.times()[k] - t_prev;
            t_prev = path.times()[k];
            let (out, next) = solid.step(&state, &path.c(k), dt)?;
            for (b, diag) in out.branches.iter().enumerate() {
                let before = det_ci(&state.u_i[b]);
                let after = det_ci(&next.u_i[b]);
                if volumetric {
                    let expected = libm::exp(2.0 * dt * diag.d.trace()) * before;
                    update.record((after - expected).abs() / expected.abs());
                } else {
                    conserved.record((after - 1.0).abs());
                }
            }
            state = next;
        }
        if volumetric {
            update.instances += 1;
        } else {
            conserved.instances += 1;
        }
    }
    Ok(alloc::vec![conserved, update])
}

/// Largest relative gap between reverse-mode and central-difference
/// gradients of the full loss, over weights with `|g| > 1e-8`. The
/// differences are taken in double-double arithmetic.
pub fn gradient_fidelity(seeds: core::ops::Range<u64>, steps: usize) -> Result<Check> {
    let mut check = Check::new("reverse vs central-difference gradient", Bound::AtMost(1e-4));
    let top = Topology::GENERALIZED;
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let teacher = random_solid(&mut rng, top, true);
        let student = random_solid(&mut rng, top, true);
        let w = student.to_vec();
        let path = random_path_with(&mut rng, steps, 0.005..0.5)?;
        let obs = teacher.predict_s11(&path)?;
        let data = alloc::vec![Dataset::new("fidelity", path, obs)?];
        let obj = Objective::new(top, &data, 1e-3, true)?;
        let (_, ad) = obj.value_and_grad(&w)?;
        let fd = obj.extended_finite_difference_grad(&w)?;
        for (a, f) in ad.iter().zip(&fd) {
            let scale = a.abs().max(f.abs());
            if scale > 1e-8 {
                check.record((a - f).abs() / scale);
            }
        }
        check.instances += 1;
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_thermodynamics_run_passes() {
        let cfg = CheckConfig {
            seed: 1,
            instances: 20,
            steps: 30,
        };
        for c in thermodynamics(&cfg).unwrap() {
            assert!(c.passed(), "{c}");
        }
    }

    #[test]
    fn small_determinant_run_passes() {
        let cfg = CheckConfig {
            seed: 2,
            instances: 4,
            steps: 0,
        };
        for c in determinant_identity(&cfg, 200).unwrap() {
            assert!(c.passed(), "{c}");
        }
    }

    #[test]
    fn check_bookkeeping() {
        let mut c = Check::new("x", Bound::AtLeast(0.0));
        assert!(!c.passed());
        c.record(1.0);
        c.record(0.5);
        assert_eq!(c.worst, 0.5);
        assert!(c.passed());
        c.record(f64::NAN);
        assert!(!c.passed());
        assert!(alloc::format!("{c}").starts_with("FAIL x"));
    }
}
