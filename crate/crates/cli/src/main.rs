//! `regconv` — density estimation for a regression response variable from
//! complete cases plus auxiliary covariate-only observations.
//!
//! Three subcommands: `estimate` (one sample in, density CSVs out),
//! `simulate` (Monte Carlo MISE study over an (N, tau) grid), and `bench`
//! (wall-clock comparison of the transform backends). Every run writes a
//! `manifest.json`; feeding it back through `--config` reproduces the run.

mod commands;
mod config;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use regconv::gausstransform::TransformError;
use regconv::harness::HarnessError;
use regconv::{Backend, Preset};

use config::{load_config, RunConfig, ScenarioConfig};

/// An error carrying its process exit code: 2 for input problems, 3 for
/// numerical failures.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        use regconv::estimators::EstimatorError;
        match &e {
            HarnessError::Datagen(_)
            | HarnessError::Config(_)
            | HarnessError::GridMismatch
            | HarnessError::Estimator(EstimatorError::Parameter(_))
            | HarnessError::Estimator(EstimatorError::Transform(
                TransformError::InvalidProblem(_),
            )) => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "regconv",
    version,
    about = "Regression-enhanced convolution density estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate both densities for one sample (synthetic preset or CSV data)
    Estimate(EstimateArgs),
    /// Monte Carlo MISE study over an (N, tau) grid
    Simulate(SimulateArgs),
    /// Wall-clock comparison of the transform backends over an M grid
    Bench(BenchArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file (a previous run's manifest.json also works)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario preset: skewed, multimodal, or correlated
    #[arg(long)]
    preset: Option<Preset>,
    /// Gauss transform backend: naive, fft, or fgt
    #[arg(long)]
    backend: Option<Backend>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluation grid size V
    #[arg(short = 'V', long)]
    grid_size: Option<usize>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Complete-case sample size (synthetic data)
    #[arg(short = 'N', long)]
    n: Option<usize>,
    /// Auxiliary-to-complete ratio M/N (synthetic data)
    #[arg(long)]
    tau: Option<usize>,
    /// CSV data file: response column (empty for auxiliary rows), then
    /// covariate columns
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Complete-case sample sizes
    #[arg(short = 'N', long = "n-values", value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    /// Auxiliary ratios tau = M/N
    #[arg(long = "tau", value_delimiter = ',')]
    tau_values: Option<Vec<usize>>,
    /// Replications per cell
    #[arg(long)]
    reps: Option<usize>,
    /// Reference-density sample size
    #[arg(long)]
    reference_size: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Complete-case sample size
    #[arg(short = 'N', long)]
    n: Option<usize>,
    /// Auxiliary sample sizes M
    #[arg(short = 'M', long = "m-values", value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    /// Timed runs per row (median reported, warm-up excluded)
    #[arg(long)]
    runs: Option<usize>,
}

fn apply_common(cfg: &mut RunConfig, common: &CommonArgs, default_grid: usize) {
    if let Some(preset) = common.preset {
        cfg.scenario = ScenarioConfig::Preset { preset };
    }
    if let Some(backend) = common.backend {
        cfg.backend = backend;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(v) = common.grid_size {
        cfg.grid_size = Some(v);
    }
    if cfg.grid_size.is_none() {
        cfg.grid_size = Some(default_grid);
    }
}

fn load_base(common: &CommonArgs) -> Result<RunConfig, CliError> {
    match &common.config {
        Some(path) => load_config(path),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(args) => {
            let mut cfg = load_base(&args.common)?;
            apply_common(&mut cfg, &args.common, 128);
            if let Some(n) = args.n {
                cfg.n = n;
            }
            if let Some(tau) = args.tau {
                cfg.tau = tau;
            }
            if let Some(data) = args.data {
                cfg.data = Some(data);
            }
            commands::cmd_estimate(&cfg)
        }
        Command::Simulate(args) => {
            let mut cfg = load_base(&args.common)?;
            apply_common(&mut cfg, &args.common, 128);
            if let Some(n_values) = args.n_values {
                cfg.n_values = n_values;
            }
            if let Some(tau_values) = args.tau_values {
                cfg.tau_values = tau_values;
            }
            if let Some(reps) = args.reps {
                cfg.replications = reps;
            }
            if let Some(size) = args.reference_size {
                cfg.reference.source_size = size;
            }
            commands::cmd_simulate(&cfg)
        }
        Command::Bench(args) => {
            let mut cfg = load_base(&args.common)?;
            apply_common(&mut cfg, &args.common, 50);
            if let Some(n) = args.n {
                cfg.n = n;
            }
            if let Some(m_values) = args.m_values {
                cfg.m_values = m_values;
            }
            if let Some(runs) = args.runs {
                cfg.runs = runs;
            }
            if let Some(backend) = args.common.backend {
                cfg.backends = vec![backend];
            }
            commands::cmd_bench(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
