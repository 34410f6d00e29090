//! Coaxial, incompressible load paths and the classical reference model used
//! to generate artificial data.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::energy::{EnergyVariant, EnergyWeights};
use crate::error::{Error, Result};
use crate::model::{MaterialState, MaxwellBranch, StepOutput, ViscoSolid};
use crate::potential::{PotentialVariant, PotentialWeights};
use crate::tensor::SymTensor3;

/// Coaxial loading mode; each maps `C11` to a diagonal `C` with `det C = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// `diag(C11, 1/√C11, 1/√C11)`
    Uniaxial,
    /// `diag(C11, C11, 1/C11²)`
    Equibiaxial,
    /// `diag(C11, 1, 1/C11)`
    PureShear,
}

impl Protocol {
    pub fn tensor(self, c11: f64) -> SymTensor3<f64> {
        match self {
            Protocol::Uniaxial => {
                let l = 1.0 / libm::sqrt(c11);
                SymTensor3::diag(c11, l, l)
            }
            Protocol::Equibiaxial => SymTensor3::diag(c11, c11, 1.0 / (c11 * c11)),
            Protocol::PureShear => SymTensor3::diag(c11, 1.0, 1.0 / c11),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Uniaxial => "uniaxial",
            Protocol::Equibiaxial => "equibiaxial",
            Protocol::PureShear => "pure_shear",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniaxial" => Ok(Protocol::Uniaxial),
            "equibiaxial" => Ok(Protocol::Equibiaxial),
            "pure_shear" | "pureshear" => Ok(Protocol::PureShear),
            other => Err(Error::InvalidArgument(alloc::format!("unknown protocol `{other}`"))),
        }
    }
}

/// Timestamped `C11` samples under one protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadPath {
    pub protocol: Protocol,
    times: Vec<f64>,
    c11: Vec<f64>,
}

/// Number of `dt` steps covering `span`, tolerating roundoff in the ratio.
fn steps(span: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt must be positive"));
    }
    if !(span >= 0.0 && span.is_finite()) {
        return Err(Error::invalid("duration must be non-negative"));
    }
    Ok(libm::round(span / dt) as usize)
}

impl LoadPath {
    /// Validates strictly increasing, non-negative, finite times and finite
    /// positive `C11`.
    pub fn new(protocol: Protocol, times: Vec<f64>, c11: Vec<f64>) -> Result<Self> {
        if times.len() != c11.len() {
            return Err(Error::ShapeMismatch {
                expected: times.len(),
                found: c11.len(),
            });
        }
        for (k, (&t, &c)) in times.iter().zip(&c11).enumerate() {
            if !t.is_finite() || !c.is_finite() {
                return Err(Error::InvalidArgument(alloc::format!("sample {k}: non-finite value")));
            }
            if c <= 0.0 {
                return Err(Error::InvalidArgument(alloc::format!(
                    "sample {k}: C11 = {c} must be positive"
                )));
            }
            if k == 0 && t < 0.0 {
                return Err(Error::invalid("first timestamp must be >= 0"));
            }
            if k > 0 && t <= times[k - 1] {
                return Err(Error::InvalidArgument(alloc::format!(
                    "sample {k}: time {t} does not increase"
                )));
            }
        }
        Ok(Self { protocol, times, c11 })
    }

    /// Linear ramp of `C11` from 1 to `c11_max` over `ramp`, then held for
    /// `hold`, sampled every `dt`.
    pub fn relaxation(protocol: Protocol, c11_max: f64, ramp: f64, hold: f64, dt: f64) -> Result<Self> {
        if !(c11_max > 0.0) || !(ramp > 0.0) {
            return Err(Error::invalid("relaxation needs C11_max > 0 and a positive ramp time"));
        }
        let n = steps(ramp + hold, dt)?;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let c11 = times
            .iter()
            .map(|&t| 1.0 + (c11_max - 1.0) * (t / ramp).min(1.0))
            .collect();
        Self::new(protocol, times, c11)
    }

    /// Piecewise-linear `C11` through `(t_end, target)` knots starting from
    /// `(0, 1)`, sampled every `dt`.
    pub fn cyclic(protocol: Protocol, segments: &[(f64, f64)], dt: f64) -> Result<Self> {
        let mut knots = Vec::with_capacity(segments.len() + 1);
        knots.push((0.0, 1.0));
        for &(t, c) in segments {
            let (tp, _) = *knots.last().expect("non-empty");
            if !(t > tp) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "segment end {t} does not follow {tp}"
                )));
            }
            if !(c > 0.0) {
                return Err(Error::invalid("segment targets must be positive"));
            }
            knots.push((t, c));
        }
        let t_end = knots.last().expect("non-empty").0;
        let n = steps(t_end, dt)?;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let c11 = times.iter().map(|&t| interpolate(&knots, t)).collect();
        Self::new(protocol, times, c11)
    }

    /// The three-segment uniaxial cycle 1.0 → 1.2 (0.4 s) → 2.1 (1.2 s) →
    /// 0.5 (1.6 s).
    pub fn example_cycle(dt: f64) -> Result<Self> {
        Self::cyclic(Protocol::Uniaxial, &[(0.4, 1.2), (1.2, 2.1), (1.6, 0.5)], dt)
    }

    /// Constant stretch rate `F11 = 1 + rate t` (`C11 = F11²`) until
    /// `c11_max`, then unloading at the same rate back to `F11 = 1`.
    pub fn loading_unloading(protocol: Protocol, rate: f64, c11_max: f64, dt: f64) -> Result<Self> {
        if !(rate > 0.0) || !(c11_max > 1.0) {
            return Err(Error::invalid("loading-unloading needs rate > 0 and C11_max > 1"));
        }
        let f_max = libm::sqrt(c11_max);
        let t_peak = (f_max - 1.0) / rate;
        let n = steps(2.0 * t_peak, dt)?;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let c11 = times
            .iter()
            .map(|&t| {
                let f = if t <= t_peak {
                    1.0 + rate * t
                } else {
                    (f_max - rate * (t - t_peak)).max(1.0)
                };
                f * f
            })
            .collect();
        Self::new(protocol, times, c11)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn c11(&self) -> &[f64] {
        &self.c11
    }

    /// Full `C` of sample `k`.
    pub fn c(&self, k: usize) -> SymTensor3<f64> {
        self.protocol.tensor(self.c11[k])
    }

    pub fn permuted(&self, perm: [usize; 3]) -> PermutedPath<'_> {
        PermutedPath { path: self, perm }
    }
}

/// A load path with its principal axes relabelled; used for isotropy checks.
pub struct PermutedPath<'a> {
    path: &'a LoadPath,
    perm: [usize; 3],
}

impl PermutedPath<'_> {
    pub fn c(&self, k: usize) -> SymTensor3<f64> {
        let d = self.path.c(k).diagonal_values();
        SymTensor3::diag(d[self.perm[0]], d[self.perm[1]], d[self.perm[2]])
    }
}

fn interpolate(knots: &[(f64, f64)], t: f64) -> f64 {
    for w in knots.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t <= t1 {
            return c0 + (c1 - c0) * (t - t0) / (t1 - t0);
        }
    }
    knots.last().map_or(1.0, |k| k.1)
}

/// Compressible neo-Hookean Maxwell element with a quadratic potential:
///
/// ```text
/// ψ = μ/2 (Ĩ1 - 3) + K/κ (I3 - 1 - ln I3)
/// g = 1/(4μ) tr(dev Σ̄)² + 1/(18K) (tr Σ̄)²,   D̄ = (1/τ) ∂g/∂Σ̄
/// ```
///
/// `κ` is the volumetric divisor, 25 by default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceModel {
    pub mu: f64,
    pub k: f64,
    pub tau: f64,
    pub vol_divisor: f64,
}

impl Default for ReferenceModel {
    fn default() -> Self {
        Self {
            mu: 12.5,
            k: 25.0,
            tau: 10.0,
            vol_divisor: 25.0,
        }
    }
}

impl ReferenceModel {
    pub fn validate(&self) -> Result<()> {
        if self.mu > 0.0 && self.k > 0.0 && self.tau > 0.0 && self.vol_divisor > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("reference model parameters must be positive"))
        }
    }

    /// The same element written in network weights: `w2_1 = μ/2`,
    /// `w3_1 = -1`, `w3_2 = K/κ`, `w̃2_7 = 1/(6μτ)`, `w2_4 = 1/(18Kτ)`.
    pub fn branch(&self) -> MaxwellBranch {
        let mut energy = EnergyWeights::zeros(EnergyVariant::Full);
        energy.scale[0] = self.mu / 2.0;
        energy.vol = Some((-1.0, self.k / self.vol_divisor));
        let mut potential = PotentialWeights::zeros(PotentialVariant::Reduced);
        // |J̃2| = 3 J2 with J2 = tr(dev Σ̄)²/2, so tr(dev Σ̄)²/(4μτ) = J̃2/(6μτ)
        potential.scale[2] = 1.0 / (6.0 * self.mu * self.tau);
        potential.scale[1] = 1.0 / (18.0 * self.k * self.tau);
        MaxwellBranch { energy, potential }
    }

    pub fn solid(&self) -> ViscoSolid {
        ViscoSolid {
            branches: alloc::vec![self.branch()],
            equilibrium: None,
        }
    }

    pub fn step(&self, state: &MaterialState, c_new: &SymTensor3<f64>, dt: f64) -> Result<(StepOutput, MaterialState)> {
        self.solid().step(state, c_new, dt)
    }

    pub fn rollout(&self, path: &LoadPath) -> Result<Vec<StepOutput>> {
        self.solid().rollout(path)
    }
}

/// Sampling of the artificial experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub ramp: f64,
    pub hold: f64,
    pub dt: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            ramp: 0.5,
            hold: 10.0,
            dt: 0.01,
        }
    }
}

/// One stress–time series.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub path: LoadPath,
    pub s11: Vec<f64>,
    /// Maximum `C11` of the protocol.
    pub c11_max: f64,
    /// Stretch rate for constant-rate protocols.
    pub rate: Option<f64>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, path: LoadPath, s11: Vec<f64>) -> Result<Self> {
        if path.len() != s11.len() {
            return Err(Error::ShapeMismatch {
                expected: path.len(),
                found: s11.len(),
            });
        }
        let c11_max = path.c11().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            name: name.into(),
            path,
            s11,
            c11_max,
            rate: None,
        })
    }
}

/// The four relaxation experiments: name, protocol, `C11_max`.
pub const RELAXATION_SETS: [(&str, Protocol, f64); 4] = [
    ("uniaxial_tension", Protocol::Uniaxial, 1.5),
    ("uniaxial_compression", Protocol::Uniaxial, 0.6),
    ("equibiaxial_tension", Protocol::Equibiaxial, 1.8),
    ("pure_shear", Protocol::PureShear, 1.2),
];

/// Artificial data: four relaxation sets followed by the cyclic set.
pub fn generate_artificial(model: &ReferenceModel, cfg: &GeneratorConfig) -> Result<Vec<Dataset>> {
    model.validate()?;
    let solid = model.solid();
    let mut out = Vec::with_capacity(5);
    for (name, protocol, c11_max) in RELAXATION_SETS {
        let path = LoadPath::relaxation(protocol, c11_max, cfg.ramp, cfg.hold, cfg.dt)?;
        let s11 = solid.predict_s11(&path)?;
        out.push(Dataset::new(name, path, s11)?);
    }
    let path = LoadPath::example_cycle(cfg.dt)?;
    let s11 = solid.predict_s11(&path)?;
    out.push(Dataset::new("uniaxial_cyclic", path, s11)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocols_are_incompressible() {
        for p in [Protocol::Uniaxial, Protocol::Equibiaxial, Protocol::PureShear] {
            for c in [0.5, 1.0, 1.7, 9.0] {
                assert!((p.tensor(c).det() - 1.0).abs() < 1e-15);
            }
        }
        assert_eq!(Protocol::Uniaxial.tensor(4.0), SymTensor3::diag(4.0, 0.5, 0.5));
    }

    #[test]
    fn relaxation_path_shape() {
        let p = LoadPath::relaxation(Protocol::Uniaxial, 1.5, 0.5, 10.0, 0.01).unwrap();
        assert_eq!(p.len(), 1051);
        assert_eq!(p.c11()[0], 1.0);
        assert_eq!(p.c11()[50], 1.5);
        assert_eq!(p.c11()[1050], 1.5);
        assert!((p.c11()[25] - 1.25).abs() < 1e-15);
        let flat = LoadPath::relaxation(Protocol::PureShear, 1.0, 0.5, 1.0, 0.1).unwrap();
        assert!(flat.c11().iter().all(|c| *c == 1.0));
    }

    #[test]
    fn cyclic_path_hits_knots() {
        let p = LoadPath::example_cycle(0.01).unwrap();
        assert_eq!(p.len(), 161);
        for (k, c) in [(0, 1.0), (40, 1.2), (120, 2.1), (160, 0.5)] {
            assert!((p.c11()[k] - c).abs() < 1e-12, "k={k}");
        }
        let id = LoadPath::cyclic(Protocol::Uniaxial, &[(1.0, 1.0)], 0.1).unwrap();
        assert!(id.c11().iter().all(|c| (*c - 1.0).abs() < 1e-15));
        assert!(LoadPath::cyclic(Protocol::Uniaxial, &[(1.0, 1.2), (0.5, 1.0)], 0.1).is_err());
    }

    #[test]
    fn loading_unloading_is_constant_rate() {
        let p = LoadPath::loading_unloading(Protocol::Uniaxial, 0.05, 4.0, 0.1).unwrap();
        // F11 = 1 + 0.05 t reaches 2 at t = 20
        assert_eq!(p.len(), 401);
        assert!((p.c11()[100] - 1.5f64.powi(2)).abs() < 1e-12);
        assert!((p.c11()[200] - 4.0).abs() < 1e-12);
        assert!((p.c11()[400] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn new_rejects_bad_samples() {
        assert!(LoadPath::new(Protocol::Uniaxial, alloc::vec![0.0, 0.0], alloc::vec![1.0, 1.0]).is_err());
        assert!(LoadPath::new(Protocol::Uniaxial, alloc::vec![0.0], alloc::vec![-1.0]).is_err());
        assert!(LoadPath::new(Protocol::Uniaxial, alloc::vec![0.0], alloc::vec![f64::NAN]).is_err());
        assert!(LoadPath::new(Protocol::Uniaxial, alloc::vec![-1.0], alloc::vec![1.0]).is_err());
    }

    #[test]
    fn reference_relaxes_after_ramp() {
        let m = ReferenceModel::default();
        let path = LoadPath::relaxation(Protocol::Uniaxial, 1.5, 0.5, 10.0, 0.01).unwrap();
        let s: Vec<f64> = m.rollout(&path).unwrap().iter().map(|o| o.s.get(0, 0)).collect();
        assert_eq!(s[0], 0.0);
        assert!(s[50] > 1.5 * s[1050]);
        assert!(s[50..].windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn reference_small_strain_slope() {
        // S11 ≈ 3μ ε for an incompressible neo-Hookean solid in uniaxial tension,
        // with C11 = 1 + 2ε; relaxation during a short fast ramp is negligible
        let m = ReferenceModel::default();
        let path = LoadPath::cyclic(Protocol::Uniaxial, &[(0.001, 1.002)], 0.0005).unwrap();
        let s = m.rollout(&path).unwrap();
        let s11 = s.last().unwrap().s.get(0, 0);
        let eps = 0.001;
        let slope = s11 / eps;
        assert!((slope / (3.0 * m.mu) - 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn artificial_dataset_has_five_sets() {
        let cfg = GeneratorConfig {
            hold: 1.0,
            ..GeneratorConfig::default()
        };
        let sets = generate_artificial(&ReferenceModel::default(), &cfg).unwrap();
        assert_eq!(sets.len(), 5);
        assert_eq!(sets[4].name, "uniaxial_cyclic");
        assert_eq!(sets, generate_artificial(&ReferenceModel::default(), &cfg).unwrap());
    }
}
