//! Loss, gradients, metrics and the projected ADAM loop.
//!
//! The loss of a solid on a set of stress–time series is
//! `Σ (S11 - Ŝ11)² + λ Σ w²`. Gradients come from one reverse sweep through
//! the whole unrolled recurrence; central finite differences are kept as an
//! independent check.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Tape, Var};
use crate::double::Dd;
use crate::error::{Error, Result};
use crate::model::{Topology, ViscoSolid};
use crate::protocol::Dataset;
use crate::scalar::Real;

/// Normalized root mean squared error and clamped coefficient of
/// determination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub epsilon: f64,
    pub r2: f64,
}

/// `ε = √(mean (S - Ŝ)²) / mean |Ŝ|` and `R² = max(0, 1 - Σ(S - Ŝ)² / Σ(S̄ - Ŝ)²)`
/// where `Ŝ` is observed and `S̄` its mean.
pub fn compute_metrics(predicted: &[f64], observed: &[f64]) -> Result<Metrics> {
    if predicted.len() != observed.len() {
        return Err(Error::ShapeMismatch {
            expected: observed.len(),
            found: predicted.len(),
        });
    }
    let n = observed.len();
    if n < 2 {
        return Err(Error::UndefinedMetric("at least two samples are required"));
    }
    let nf = n as f64;
    let mean = observed.iter().sum::<f64>() / nf;
    let mean_abs = observed.iter().map(|s| s.abs()).sum::<f64>() / nf;
    if mean_abs == 0.0 {
        return Err(Error::UndefinedMetric("observed stresses are all zero"));
    }
    let sse: f64 = predicted.iter().zip(observed).map(|(p, o)| (p - o) * (p - o)).sum();
    let sst: f64 = observed.iter().map(|o| (mean - o) * (mean - o)).sum();
    let epsilon = libm::sqrt(sse / nf) / mean_abs;
    let r2 = if sst == 0.0 {
        if sse == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - sse / sst).max(0.0)
    };
    Ok(Metrics { epsilon, r2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMode {
    Reverse,
    FiniteDifference,
}

/// Sampling ranges of the initial weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitConfig {
    /// Upper bound of `w2_*` and `w3_2`.
    pub scale_max: f64,
    /// Upper bound of `w1_*`.
    pub shape_max: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            scale_max: 0.1,
            shape_max: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// When set, the step size decays geometrically from `learning_rate` to
    /// this value over the run.
    pub lr_final: Option<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// L2 coefficient λ.
    pub l2: f64,
    /// Whether the volumetric exponents `w3_1` are regularized too.
    pub l2_volumetric_exponent: bool,
    pub seed: u64,
    /// Failed rollouts cost this multiple of the epoch-0 loss.
    pub penalty_factor: f64,
    pub gradient: GradientMode,
    pub init: InitConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10_000,
            learning_rate: 1e-3,
            lr_final: None,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            l2: 1e-3,
            l2_volumetric_exponent: true,
            seed: 0,
            penalty_factor: 1e6,
            gradient: GradientMode::Reverse,
            init: InitConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be positive"));
        }
        if !(self.l2 >= 0.0) {
            return Err(Error::invalid("L2 coefficient must be non-negative"));
        }
        if !(self.learning_rate > 0.0) || self.lr_final.is_some_and(|l| !(l > 0.0)) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        Ok(())
    }
}

/// Random initial weights for `top`: `w1_*` in `[0, shape_max]`, `w2_*` and
/// `w3_2` in `[0, scale_max]`, `w3_1 = 0`.
pub fn initial_weights(top: Topology, init: &InitConfig, seed: u64) -> ViscoSolid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = top
        .names()
        .iter()
        .map(|n| {
            let short = n.rsplit('.').next().unwrap_or(n);
            if short == "w3_1" {
                0.0
            } else if short.starts_with("w1_") {
                rng.gen::<f64>() * init.shape_max
            } else {
                rng.gen::<f64>() * init.scale_max
            }
        })
        .collect();
    ViscoSolid::from_slice(top, &w).expect("topology-sized weight vector")
}

/// The training objective over a fixed list of series.
pub struct Objective<'a> {
    top: Topology,
    datasets: &'a [Dataset],
    l2: f64,
    /// Per-weight L2 mask.
    regularized: Vec<bool>,
}

impl<'a> Objective<'a> {
    pub fn new(top: Topology, datasets: &'a [Dataset], l2: f64, l2_volumetric_exponent: bool) -> Result<Self> {
        for d in datasets {
            if d.path.len() != d.s11.len() {
                return Err(Error::ShapeMismatch {
                    expected: d.path.len(),
                    found: d.s11.len(),
                });
            }
        }
        let regularized = top
            .names()
            .iter()
            .map(|n| l2_volumetric_exponent || !n.ends_with(".psi.w3_1"))
            .collect();
        Ok(Self {
            top,
            datasets,
            l2,
            regularized,
        })
    }

    pub fn topology(&self) -> Topology {
        self.top
    }

    fn penalty_term<T: Real>(&self, w: &[T]) -> T {
        let mut r = T::zero();
        for (x, m) in w.iter().zip(&self.regularized) {
            if *m {
                r += *x * *x;
            }
        }
        r * self.l2
    }

    /// Sum of squared `S11` residuals over every series.
    pub fn data_loss<T: Real>(&self, model: &ViscoSolid<T>) -> Result<T> {
        let mut total = T::zero();
        for d in self.datasets {
            for (p, o) in model.predict_s11(&d.path)?.into_iter().zip(&d.s11) {
                let r = p - *o;
                total += r * r;
            }
        }
        Ok(total)
    }

    /// Loss at the flat weight vector `w`, in any scalar type.
    pub fn loss_in<T: Real>(&self, w: &[T]) -> Result<T> {
        let model = ViscoSolid::from_slice(self.top, w)?;
        Ok(self.data_loss(&model)? + self.penalty_term(w))
    }

    /// Loss at the flat weight vector `w`.
    pub fn value(&self, w: &[f64]) -> Result<f64> {
        self.loss_in(w)
    }

    /// Loss and reverse-mode gradient at `w`.
    pub fn value_and_grad(&self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut grad = vec![0.0; w.len()];
        let mut total = 0.0;
        let mut tape = Tape::with_capacity(1 << 16);
        for d in self.datasets {
            tape.clear();
            let (value, g) = {
                let vars: Vec<Var<'_>> = w.iter().map(|x| tape.var(*x)).collect();
                let model = ViscoSolid::from_slice(self.top, &vars)?;
                let s = model.predict_s11(&d.path)?;
                let mut l = Var::constant(0.0);
                for (p, o) in s.iter().zip(&d.s11) {
                    let r = *p - *o;
                    l += r * r;
                }
                let adj = tape.gradient(l);
                (l.value(), vars.iter().map(|v| adj.wrt(*v)).collect::<Vec<_>>())
            };
            total += value;
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b;
            }
        }
        for (k, x) in w.iter().enumerate() {
            if self.regularized[k] {
                grad[k] += 2.0 * self.l2 * x;
            }
        }
        Ok((total + self.penalty_term(w), grad))
    }

    /// Central differences with step `1e-5 max(|w|, 1e-2)` per weight.
    pub fn finite_difference_grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        central_differences::<f64>(w, |x| self.loss_in(x))
    }

    /// [`Self::finite_difference_grad`] with the loss evaluated in
    /// double-double arithmetic.
    pub fn extended_finite_difference_grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        central_differences::<Dd>(w, |x| self.loss_in(x))
    }

    pub fn gradient(&self, w: &[f64], mode: GradientMode) -> Result<(f64, Vec<f64>)> {
        match mode {
            GradientMode::Reverse => self.value_and_grad(w),
            GradientMode::FiniteDifference => Ok((self.value(w)?, self.finite_difference_grad(w)?)),
        }
    }
}

fn central_differences<T: Real>(w: &[f64], mut f: impl FnMut(&[T]) -> Result<T>) -> Result<Vec<f64>> {
    let mut x: Vec<T> = w.iter().map(|v| T::cst(*v)).collect();
    let mut g = Vec::with_capacity(w.len());
    for k in 0..w.len() {
        let h = 1e-5 * w[k].abs().max(1e-2);
        x[k] = T::cst(w[k]) + h;
        let fp = f(&x)?;
        x[k] = T::cst(w[k]) - h;
        let fm = f(&x)?;
        x[k] = T::cst(w[k]);
        g.push(((fp - fm) / (2.0 * h)).value());
    }
    Ok(g)
}

/// `Σ (S11 - Ŝ11)² + λ Σ w²` over `datasets`.
pub fn loss(model: &ViscoSolid, datasets: &[Dataset], l2: f64) -> Result<f64> {
    Objective::new(model.topology(), datasets, l2, true)?.value(&model.to_vec())
}

/// Reverse-mode gradient of [`loss`] in [`crate::model::Topology::names`] order.
pub fn grad_loss(model: &ViscoSolid, datasets: &[Dataset], l2: f64) -> Result<Vec<f64>> {
    Ok(Objective::new(model.topology(), datasets, l2, true)?
        .value_and_grad(&model.to_vec())?
        .1)
}

/// ADAM with projection of sign-constrained weights onto `w ≥ 0`.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl Adam {
    pub fn new(n: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn from_config(n: usize, cfg: &TrainConfig) -> Self {
        Self::new(n, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps)
    }

    /// Step size at 0-based `epoch` of `cfg.epochs`.
    pub fn scheduled_lr(cfg: &TrainConfig, epoch: usize) -> f64 {
        match cfg.lr_final {
            Some(end) if cfg.epochs > 1 => {
                let frac = epoch as f64 / (cfg.epochs - 1) as f64;
                cfg.learning_rate * libm::pow(end / cfg.learning_rate, frac)
            }
            _ => cfg.learning_rate,
        }
    }

    pub fn step(&mut self, w: &mut [f64], grad: &[f64], constrained: &[bool]) {
        self.t += 1;
        let b1t = 1.0 - libm::pow(self.beta1, self.t as f64);
        let b2t = 1.0 - libm::pow(self.beta2, self.t as f64);
        for k in 0..w.len() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grad[k];
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grad[k] * grad[k];
            let mh = self.m[k] / b1t;
            let vh = self.v[k] / b2t;
            w[k] -= self.lr * mh / (libm::sqrt(vh) + self.eps);
            if constrained[k] && w[k] < 0.0 {
                w[k] = 0.0;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    pub model: ViscoSolid,
    /// Loss before each update.
    pub history: Vec<f64>,
    pub best_loss: f64,
    /// One entry per dataset, at the final weights.
    pub metrics: Vec<Metrics>,
}

/// Projected ADAM from `init` for `cfg.epochs` full-batch updates.
pub fn train(init: &ViscoSolid, datasets: &[Dataset], cfg: &TrainConfig) -> Result<TrainResult> {
    train_with(init, datasets, cfg, |_, _| {})
}

/// [`train`] with a callback receiving `(epoch, loss)`.
pub fn train_with(
    init: &ViscoSolid,
    datasets: &[Dataset],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainResult> {
    cfg.validate()?;
    if datasets.is_empty() {
        return Err(Error::invalid("training needs at least one dataset"));
    }
    let top = init.topology();
    let obj = Objective::new(top, datasets, cfg.l2, cfg.l2_volumetric_exponent)?;
    let constrained = top.constrained();
    let mut w = init.to_vec();
    let mut adam = Adam::from_config(w.len(), cfg);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut penalty = None;
    let mut best = f64::INFINITY;
    for epoch in 0..cfg.epochs {
        let (l, g) = match obj.gradient(&w, cfg.gradient) {
            Ok(r) => r,
            Err(e @ Error::Step { .. }) => match penalty {
                Some(p) => (p, vec![0.0; w.len()]),
                None => return Err(e),
            },
            Err(e) => return Err(e),
        };
        if penalty.is_none() {
            penalty = Some(cfg.penalty_factor * l);
        }
        best = best.min(l);
        history.push(l);
        on_epoch(epoch, l);
        adam.lr = Adam::scheduled_lr(cfg, epoch);
        adam.step(&mut w, &g, &constrained);
    }
    let model = ViscoSolid::from_slice(top, &w)?;
    let metrics = evaluate(&model, datasets)?;
    Ok(TrainResult {
        model,
        history,
        best_loss: best,
        metrics,
    })
}

/// Metrics of `model` on every dataset.
pub fn evaluate(model: &ViscoSolid, datasets: &[Dataset]) -> Result<Vec<Metrics>> {
    datasets
        .iter()
        .map(|d| compute_metrics(&model.predict_s11(&d.path)?, &d.s11))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{LoadPath, Protocol};

    #[test]
    fn metrics_hand_examples() {
        let m = compute_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m, Metrics { epsilon: 0.0, r2: 1.0 });
        // SSE = 1, n = 3, mean|Ŝ| = 2, SST = 2
        let m = compute_metrics(&[1.0, 2.0, 4.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((m.epsilon - 0.5 * (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((m.r2 - 0.5).abs() < 1e-15);
        let m = compute_metrics(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.r2, 0.0);
        assert!(compute_metrics(&[0.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(compute_metrics(&[1.0], &[1.0]).is_err());
        assert!(compute_metrics(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn adam_first_step_matches_textbook() {
        let mut a = Adam::new(1, 1e-3, 0.9, 0.999, 1e-8);
        let mut w = [0.5];
        a.step(&mut w, &[2.0], &[false]);
        // m̂ = 2, v̂ = 4 after bias correction
        let expected = 0.5 - 1e-3 * 2.0 / (2.0 + 1e-8);
        assert!((w[0] - expected).abs() < 1e-16);
        let mut z = [0.3];
        Adam::new(1, 1e-3, 0.9, 0.999, 1e-8).step(&mut z, &[0.0], &[true]);
        assert_eq!(z[0], 0.3);
        let mut c = [0.0];
        Adam::new(1, 1e-3, 0.9, 0.999, 1e-8).step(&mut c, &[1.0], &[true]);
        assert_eq!(c[0], 0.0);
    }

    #[test]
    fn zero_model_on_zero_data() {
        let path = LoadPath::relaxation(Protocol::Uniaxial, 1.2, 0.5, 0.5, 0.1).unwrap();
        let data = vec![Dataset::new("zero", path.clone(), vec![0.0; path.len()]).unwrap()];
        let m = ViscoSolid::zeros(Topology::MAXWELL);
        assert_eq!(loss(&m, &data, 0.0).unwrap(), 0.0);
        assert!(grad_loss(&m, &data, 0.0).unwrap().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn l2_gradient_is_two_lambda_w() {
        let path = LoadPath::relaxation(Protocol::Uniaxial, 1.0, 0.5, 0.5, 0.1).unwrap();
        let data = vec![Dataset::new("flat", path.clone(), vec![0.0; path.len()]).unwrap()];
        let m = initial_weights(Topology::MAXWELL, &InitConfig::default(), 3);
        let g = grad_loss(&m, &data, 0.5).unwrap();
        for (gk, wk) in g.iter().zip(m.to_vec()) {
            assert!((gk - 2.0 * 0.5 * wk).abs() < 1e-15);
        }
    }

    #[test]
    fn initialization_ranges_and_determinism() {
        let top = Topology::GENERALIZED;
        let a = initial_weights(top, &InitConfig::default(), 7);
        assert_eq!(a, initial_weights(top, &InitConfig::default(), 7));
        assert_ne!(a, initial_weights(top, &InitConfig::default(), 8));
        for (n, w) in top.names().iter().zip(a.to_vec()) {
            if n.ends_with("w3_1") {
                assert_eq!(w, 0.0);
            } else if n.rsplit('.').next().unwrap().starts_with("w1_") {
                assert!((0.0..=1.0).contains(&w));
            } else {
                assert!((0.0..=0.1).contains(&w));
            }
        }
    }

    #[test]
    fn reverse_gradient_matches_finite_differences_on_a_small_case() {
        let path = LoadPath::relaxation(Protocol::Uniaxial, 1.3, 0.1, 0.1, 0.02).unwrap();
        let teacher = initial_weights(Topology::MAXWELL, &InitConfig::default(), 1);
        let obs = teacher.predict_s11(&path).unwrap();
        let data = vec![Dataset::new("t", path, obs).unwrap()];
        let student = initial_weights(Topology::MAXWELL, &InitConfig::default(), 2);
        let obj = Objective::new(Topology::MAXWELL, &data, 1e-3, true).unwrap();
        let w = student.to_vec();
        let (_, g) = obj.value_and_grad(&w).unwrap();
        let fd = obj.finite_difference_grad(&w).unwrap();
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-5 * b.abs().max(1e-6), "{a} vs {b}");
        }
    }
}
