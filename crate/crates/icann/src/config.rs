//! Run configuration: a flat file of `key = value` lines.
//!
//! ```text
//! branches = 1
//! potential = reduced
//! equilibrium = false
//! epochs = 10000
//! learning_rate = 1e-2
//! lr_final = 1e-4
//! train = data/uniaxial_tension.csv, data/pure_shear.csv
//! test = data/uniaxial_cyclic.csv
//! out = results
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use icann_core::presets::Preset;
use icann_core::protocol::GeneratorConfig;
use icann_core::training::GradientMode;
use icann_core::{ReferenceModel, Topology, TrainConfig};

use crate::dataset::parse_key_values;
use crate::error::{CliError, Result};
use crate::weights::parse_potential;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub topology: Topology,
    pub train: TrainConfig,
    pub train_sets: Vec<PathBuf>,
    pub test_sets: Vec<PathBuf>,
    pub out: PathBuf,
    /// Weights to evaluate, either a file or a published set.
    pub weights: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub reference: ReferenceModel,
    pub generator: GeneratorConfig,
    /// Progress line every this many epochs; 0 is silent.
    pub log_every: usize,
    pub check_instances: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            topology: Topology::MAXWELL,
            train: TrainConfig::default(),
            train_sets: Vec::new(),
            test_sets: Vec::new(),
            out: PathBuf::from("out"),
            weights: None,
            preset: None,
            reference: ReferenceModel::default(),
            generator: GeneratorConfig::default(),
            log_every: 0,
            check_instances: 1000,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse `{v}`")))
}

fn finite(key: &str, v: &str) -> Result<f64> {
    let x: f64 = num(key, v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{key}: `{v}` is not finite")))
    }
}

fn paths(base: &Path, v: &str) -> Vec<PathBuf> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| base.join(s))
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Self> {
        let map: BTreeMap<String, String> = parse_key_values(text, origin)?;
        let mut c = RunConfig::default();
        for (k, v) in &map {
            let v = v.as_str();
            let t = &mut c.train;
            match k.as_str() {
                "branches" => c.topology.branches = num(k, v)?,
                "potential" => {
                    c.topology.potential = parse_potential(v)
                        .ok_or_else(|| CliError::Config(format!("potential: expected full or reduced, got `{v}`")))?
                }
                "equilibrium" => c.topology.equilibrium = num(k, v)?,
                "epochs" => t.epochs = num(k, v)?,
                "learning_rate" => t.learning_rate = finite(k, v)?,
                "lr_final" => t.lr_final = Some(finite(k, v)?),
                "beta1" => t.beta1 = finite(k, v)?,
                "beta2" => t.beta2 = finite(k, v)?,
                "adam_eps" => t.adam_eps = finite(k, v)?,
                "l2" => t.l2 = finite(k, v)?,
                "l2_volumetric_exponent" => t.l2_volumetric_exponent = num(k, v)?,
                "seed" => t.seed = num(k, v)?,
                "penalty_factor" => t.penalty_factor = finite(k, v)?,
                "gradient" => {
                    t.gradient = match v {
                        "reverse" => GradientMode::Reverse,
                        "finite_difference" => GradientMode::FiniteDifference,
                        _ => {
                            return Err(CliError::Config(format!(
                                "gradient: expected reverse or finite_difference, got `{v}`"
                            )))
                        }
                    }
                }
                "init.scale_max" => t.init.scale_max = finite(k, v)?,
                "init.shape_max" => t.init.shape_max = finite(k, v)?,
                "train" => c.train_sets = paths(base, v),
                "test" => c.test_sets = paths(base, v),
                "out" => c.out = base.join(v),
                "weights" => c.weights = Some(base.join(v)),
                "preset" => {
                    c.preset = Some(Preset::from_name(v).ok_or_else(|| {
                        let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                        CliError::Config(format!("preset: unknown `{v}`, expected one of {}", names.join(", ")))
                    })?)
                }
                "reference.mu" => c.reference.mu = finite(k, v)?,
                "reference.k" => c.reference.k = finite(k, v)?,
                "reference.tau" => c.reference.tau = finite(k, v)?,
                "reference.vol_divisor" => c.reference.vol_divisor = finite(k, v)?,
                "generator.ramp" => c.generator.ramp = finite(k, v)?,
                "generator.hold" => c.generator.hold = finite(k, v)?,
                "generator.dt" => c.generator.dt = finite(k, v)?,
                "log_every" => c.log_every = num(k, v)?,
                "check_instances" => c.check_instances = num(k, v)?,
                _ => return Err(CliError::Config(format!("unknown key `{k}`"))),
            }
        }
        if c.topology.branches == 0 {
            return Err(CliError::Config("branches must be at least 1".into()));
        }
        if c.weights.is_some() && c.preset.is_some() {
            return Err(CliError::Config("set either weights or preset, not both".into()));
        }
        c.train.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, path)
    }

    /// Training needs data, existing files and disjoint splits.
    pub fn validate_split(&self) -> Result<()> {
        if self.train_sets.is_empty() {
            return Err(CliError::Config("no training datasets listed under `train`".into()));
        }
        for p in self.train_sets.iter().chain(&self.test_sets) {
            if !p.is_file() {
                return Err(CliError::Config(format!("dataset {} does not exist", p.display())));
            }
        }
        let canon = |p: &PathBuf| p.canonicalize().unwrap_or_else(|_| p.clone());
        for a in &self.test_sets {
            if self.train_sets.iter().any(|b| canon(a) == canon(b)) {
                return Err(CliError::Config(format!(
                    "{} is listed in both train and test",
                    a.display()
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in self.train_sets.iter().chain(&self.test_sets) {
            if !seen.insert(canon(p)) {
                return Err(CliError::Config(format!("{} is listed twice", p.display())));
            }
        }
        Ok(())
    }
}
