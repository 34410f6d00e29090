use std::io::Write;
use std::path::{Path, PathBuf};

use icann_core::checks::{self, Check, CheckConfig};
use icann_core::protocol::generate_artificial;
use icann_core::training::{compute_metrics, initial_weights, train_with};
use icann_core::{Dataset, Metrics, ViscoSolid};

use crate::config::RunConfig;
use crate::dataset;
use crate::error::{CliError, Result};
use crate::weights;

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn read_all(paths: &[PathBuf]) -> Result<Vec<Dataset>> {
    paths.iter().map(|p| dataset::read(p)).collect()
}

/// Writes the artificial data sets into `out`; returns the CSV paths.
pub fn generate(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let sets =
        generate_artificial(&cfg.reference, &cfg.generator).map_err(|e| CliError::model("reference model", e))?;
    create_dir(out)?;
    let mut written = Vec::with_capacity(sets.len());
    for d in &sets {
        let p = out.join(format!("{}.csv", d.name));
        dataset::write(&p, d)?;
        written.push(p);
    }
    Ok(written)
}

/// One row of a metrics table.
#[derive(Clone, Debug)]
pub struct Row {
    pub dataset: String,
    pub split: &'static str,
    pub protocol: String,
    pub c11_max: f64,
    pub rate: Option<f64>,
    pub metrics: Metrics,
}

fn write_metrics(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| dataset::csv_io(path, e))?;
    w.write_record(["dataset", "split", "protocol", "c11_max", "rate", "epsilon", "r2"])
        .map_err(|e| dataset::csv_io(path, e))?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.split.to_string(),
            r.protocol.clone(),
            format!("{}", r.c11_max),
            r.rate.map(|x| format!("{x}")).unwrap_or_default(),
            format!("{:.6}", r.metrics.epsilon),
            format!("{:.6}", r.metrics.r2),
        ])
        .map_err(|e| dataset::csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_prediction(path: &Path, d: &Dataset, pred: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| dataset::csv_io(path, e))?;
    w.write_record(["t", "C11", "S11_observed", "S11_predicted"])
        .map_err(|e| dataset::csv_io(path, e))?;
    for (((t, c), o), p) in d.path.times().iter().zip(d.path.c11()).zip(&d.s11).zip(pred) {
        w.write_record([format!("{t:?}"), format!("{c:?}"), format!("{o:?}"), format!("{p:?}")])
            .map_err(|e| dataset::csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Rolls `model` out on each set, writing `predictions/<name>.csv`.
fn assess(model: &ViscoSolid, sets: &[(Dataset, &'static str)], out: &Path) -> Result<Vec<Row>> {
    let dir = out.join("predictions");
    create_dir(&dir)?;
    let mut rows = Vec::with_capacity(sets.len());
    for (d, split) in sets {
        let pred = model
            .predict_s11(&d.path)
            .map_err(|e| CliError::model(format!("dataset {}", d.name), e))?;
        write_prediction(&dir.join(format!("{}.csv", d.name)), d, &pred)?;
        let metrics = compute_metrics(&pred, &d.s11).map_err(|e| CliError::model(format!("dataset {}", d.name), e))?;
        rows.push(Row {
            dataset: d.name.clone(),
            split,
            protocol: d.path.protocol.to_string(),
            c11_max: d.c11_max,
            rate: d.rate,
            metrics,
        });
    }
    write_metrics(&out.join("metrics.csv"), &rows)?;
    Ok(rows)
}

fn labelled(train: Vec<Dataset>, test: Vec<Dataset>) -> Vec<(Dataset, &'static str)> {
    train
        .into_iter()
        .map(|d| (d, "train"))
        .chain(test.into_iter().map(|d| (d, "test")))
        .collect()
}

pub struct TrainOutput {
    pub model: ViscoSolid,
    pub history: Vec<f64>,
    pub rows: Vec<Row>,
}

/// Trains from the seeded initial weights and writes `weights.txt`,
/// `loss_history.csv`, `metrics.csv` and per-set predictions.
pub fn train(cfg: &RunConfig, out: &Path, log: &mut dyn Write) -> Result<TrainOutput> {
    cfg.validate_split()?;
    let train_sets = read_all(&cfg.train_sets)?;
    let test_sets = read_all(&cfg.test_sets)?;
    let init = initial_weights(cfg.topology, &cfg.train.init, cfg.train.seed);
    let every = cfg.log_every;
    let result = train_with(&init, &train_sets, &cfg.train, |epoch, loss| {
        if every > 0 && epoch % every == 0 {
            let _ = writeln!(log, "epoch {epoch:>6}  loss {loss:.6e}");
        }
    })
    .map_err(|e| CliError::model("training", e))?;
    create_dir(out)?;
    weights::write(&out.join("weights.txt"), &result.model)?;
    let hist = out.join("loss_history.csv");
    let mut text = String::from("epoch,loss\n");
    for (k, l) in result.history.iter().enumerate() {
        text.push_str(&format!("{k},{l:?}\n"));
    }
    std::fs::write(&hist, text).map_err(|e| CliError::io(&hist, e))?;
    let rows = assess(&result.model, &labelled(train_sets, test_sets), out)?;
    Ok(TrainOutput {
        model: result.model,
        history: result.history,
        rows,
    })
}

/// The weights named by the config, from a file or a published set.
pub fn load_model(cfg: &RunConfig) -> Result<ViscoSolid> {
    match (&cfg.weights, cfg.preset) {
        (Some(p), _) => weights::read(p, None),
        (None, Some(p)) => Ok(p.solid()),
        (None, None) => Err(CliError::Config("eval needs `weights` or `preset`".into())),
    }
}

/// Evaluates fixed weights on every listed set without training.
pub fn eval(cfg: &RunConfig, out: &Path) -> Result<Vec<Row>> {
    if cfg.train_sets.is_empty() && cfg.test_sets.is_empty() {
        return Err(CliError::Config("no datasets listed under `train` or `test`".into()));
    }
    let model = load_model(cfg)?;
    let sets = labelled(read_all(&cfg.train_sets)?, read_all(&cfg.test_sets)?);
    create_dir(out)?;
    assess(&model, &sets, out)
}

/// Runs the randomized property checks.
pub fn check(seed: u64, instances: usize) -> Result<Vec<Check>> {
    let ctx = |e| CliError::model("check", e);
    let cc = CheckConfig {
        seed,
        instances,
        ..CheckConfig::default()
    };
    let mut all = checks::thermodynamics(&cc).map_err(ctx)?;
    all.extend(checks::determinant_identity(&cc, 1000).map_err(ctx)?);
    all.push(checks::gradient_fidelity(seed..seed + 10, 20).map_err(ctx)?);
    Ok(all)
}

pub fn print_rows(rows: &[Row], w: &mut dyn Write) {
    let _ = writeln!(w, "{:<28} {:<6} {:>10} {:>8}", "dataset", "split", "epsilon", "R2");
    for r in rows {
        let _ = writeln!(
            w,
            "{:<28} {:<6} {:>10.4} {:>8.4}",
            r.dataset, r.split, r.metrics.epsilon, r.metrics.r2
        );
    }
}
