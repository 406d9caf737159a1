use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riskver::cli::{self, CliError, Experiment, ExperimentConfig};

/// Risk verification experiments for closed-loop stochastic systems.
#[derive(Parser)]
#[command(name = "riskver", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the trial pool (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory for report files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo risk estimates with high-confidence upper bounds.
    Verify(Common),
    /// VaR/CVaR point estimates across a list of risk levels.
    SweepBeta(Common),
    /// Perturbed-risk certificates from a trajectory-error bound.
    Gap(Common),
    /// Trace-difference distribution from paired rollouts.
    PairedGamma(Common),
    /// Wasserstein distance between sample files or command distributions.
    Wasserstein(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Verify(c)
            | Command::SweepBeta(c)
            | Command::Gap(c)
            | Command::PairedGamma(c)
            | Command::Wasserstein(c) => c,
        }
    }
}

fn run(cmd: &Command) -> Result<(), CliError> {
    let common = cmd.common();
    if let Some(jobs) = common.jobs {
        // Ignore the error when a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    let config_dir = common
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let exp = Experiment::build(config, &config_dir)?;
    match cmd {
        Command::Verify(_) => cli::cmd_verify(&exp, &common.out),
        Command::SweepBeta(_) => cli::cmd_sweep_beta(&exp, &common.out),
        Command::Gap(_) => cli::cmd_gap(&exp, &common.out),
        Command::PairedGamma(_) => cli::cmd_paired_gamma(&exp, &common.out),
        Command::Wasserstein(_) => cli::cmd_wasserstein(&exp, &config_dir, &common.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
