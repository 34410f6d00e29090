//! Command-line surface of the `icann` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands;
use crate::{CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "icann",
    version,
    about = "Recurrent constitutive networks for finite-strain viscoelasticity"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(short, long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the artificial relaxation and cyclic data sets.
    Generate(Common),
    /// Train a network and write weights, metrics and the loss history.
    Train(Common),
    /// Evaluate fixed weights on data sets.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Weight file; overrides the config.
        #[arg(short, long, conflicts_with = "preset")]
        weights: Option<PathBuf>,
        /// Published weight set: artificial, vhb4910, muscle_train_one, muscle_train_four.
        #[arg(short, long)]
        preset: Option<String>,
        /// Data sets to evaluate; replaces those in the config.
        data: Vec<PathBuf>,
    },
    /// Run the randomized thermodynamic, determinant and gradient checks.
    Check {
        #[command(flatten)]
        common: Common,
        /// Number of random instances per check.
        #[arg(short, long)]
        instances: Option<usize>,
    },
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.train.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

/// Executes one parsed command, printing reports to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(c) => {
            let cfg = load(&c)?;
            for p in commands::generate(&cfg, &cfg.out)? {
                let _ = writeln!(out, "{}", p.display());
            }
        }
        Command::Train(c) => {
            let cfg = load(&c)?;
            let trained = commands::train(&cfg, &cfg.out, &mut std::io::stderr())?;
            commands::print_rows(&trained.rows, out);
        }
        Command::Eval {
            common,
            weights,
            preset,
            data,
        } => {
            let mut cfg = load(&common)?;
            if let Some(w) = weights {
                cfg.weights = Some(w);
                cfg.preset = None;
            }
            if let Some(p) = preset {
                cfg.preset = Some(
                    icann_core::presets::Preset::from_name(&p)
                        .ok_or_else(|| CliError::Config(format!("unknown preset `{p}`")))?,
                );
                cfg.weights = None;
            }
            if !data.is_empty() {
                cfg.train_sets.clear();
                cfg.test_sets = data;
            }
            let rows = commands::eval(&cfg, &cfg.out)?;
            commands::print_rows(&rows, out);
        }
        Command::Check { common, instances } => {
            let cfg = load(&common)?;
            let checks = commands::check(cfg.train.seed, instances.unwrap_or(cfg.check_instances))?;
            for c in &checks {
                let _ = writeln!(out, "{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed()).count();
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli, out)
}
