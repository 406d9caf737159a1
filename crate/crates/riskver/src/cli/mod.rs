//! Batch experiment orchestration: config parsing, experiment assembly, and
//! the report-writing commands behind the command-line interface.

mod commands;
mod config;
mod experiment;

pub use commands::{
    cmd_gap, cmd_paired_gamma, cmd_sweep_beta, cmd_verify, cmd_wasserstein, wasserstein_1d,
};
pub use config::{
    ConstraintCfg, ControllerCfg, ExperimentConfig, GainCfg, GapCfg, MetricCfg, PerturbationCfg,
    RiskCfg, SpecCfg, SystemCfg, WassersteinCfg,
};
pub use experiment::{Experiment, RiskEntry};

use thiserror::Error;

use crate::gap::GapError;
use crate::risk::RiskError;
use crate::sim::SimError;
use crate::stl::StlError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stl(#[from] StlError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Gap(#[from] GapError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CliError {
    /// Exit code contract: 0 success, 2 config error, 3 runtime error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}
