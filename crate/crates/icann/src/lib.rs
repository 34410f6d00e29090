//! File formats and commands around `icann-core`: datasets, weight files,
//! run configuration, and the `generate` / `train` / `eval` / `check`
//! entry points used by the `icann` binary.

pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod weights;

pub use config::RunConfig;
pub use error::{CliError, Result};
