//! `ar1bayes` command-line front end.

mod commands;
mod config;
mod data;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] ar1bayes::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use ar1bayes::Error as E;
        match self {
            CliError::Usage(_) | CliError::Write { .. } => 1,
            CliError::Data(_) | CliError::Read { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Core(e) => match e {
                E::InvalidParameter { .. } | E::Nonstationary(_) | E::EmptyGrid(_) => 1,
                E::SeriesTooShort { .. } | E::NonFinite(_) | E::Degenerate(_) => 2,
                E::Numerical(_) => 3,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ar1bayes", version, about = "Bayesian and classical estimation for the AR(1) model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a zero-mean AR(1) series and write it as index,value rows.
    Simulate(SimulateArgs),
    /// Compute the five point estimates of phi for an observed series.
    Estimate(EstimateArgs),
    /// Estimator comparison study: one table per series length.
    Compare(StudyArgs),
    /// Interval-coverage study under the four priors: one table per phi.
    Sensitivity(SensitivityArgs),
    /// Full pipeline on an observed series: unit-root test, estimates,
    /// residual normality and per-prior posterior summaries.
    Analyze(AnalyzeArgs),
    /// Absolute bias of each estimator over repeated simulations.
    BiasPlot(BiasPlotArgs),
}

/// Output formatting shared by every command.
#[derive(Debug, Clone, Args)]
pub struct FormatArgs {
    /// Decimal places in tables, or `full` for shortest round-trip output.
    #[arg(long, default_value = "4")]
    pub precision: String,
}

/// Prior hyperparameters for the truncated-normal / natural-conjugate priors.
#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    /// Prior location d.
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    /// Prior variance sigma_phi^2.
    #[arg(long = "sigma-phi2")]
    pub sigma_phi2: Option<f64>,
    /// Derive d and sigma_phi^2 from a training prefix of the series.
    #[arg(long, conflicts_with_all = ["d", "sigma_phi2"])]
    pub train: bool,
    /// With --train: `holdout` (likelihood skips the prefix) or `reuse`.
    #[arg(long = "training-use")]
    pub training_use: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Delimited text file, one observation per row.
    pub input: PathBuf,
    /// Column to read: 1-based index or header name (default: last column).
    #[arg(long)]
    pub column: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, default_value_t = 500)]
    pub length: usize,
    #[arg(long = "burn-in", default_value_t = ar1bayes::ar1::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = ar1bayes::experiments::DEFAULT_SEED)]
    pub seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub format: FormatArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub format: FormatArgs,
}

/// Overrides shared by the simulation studies; each wins over the config file.
#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    /// Key-value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Comma-separated phi grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi: Option<Vec<f64>>,
    /// Comma-separated series lengths.
    #[arg(long, value_delimiter = ',')]
    pub length: Option<Vec<usize>>,
    #[arg(long = "burn-in")]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long = "training-use")]
    pub training_use: Option<String>,
    #[command(flatten)]
    pub format: FormatArgs,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub study: StudyArgs,
    /// Comma-separated priors: jeffreys, g, nc, tn.
    #[arg(long, value_delimiter = ',')]
    pub prior: Option<Vec<String>>,
    /// g of the g prior (default: the series length).
    #[arg(long)]
    pub g: Option<f64>,
    /// Posterior mass of the centered interval.
    #[arg(long)]
    pub prob: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[arg(long)]
    pub g: Option<f64>,
    /// Comma-separated priors: jeffreys, g, nc, tn.
    #[arg(long = "prior", value_delimiter = ',')]
    pub prior_list: Option<Vec<String>>,
    /// Largest Newey-West truncation lag of the unit-root test.
    #[arg(long = "pp-lags", default_value_t = 3)]
    pub pp_lags: usize,
    /// Output directory (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub format: FormatArgs,
}

#[derive(Debug, Args)]
pub struct BiasPlotArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long = "burn-in")]
    pub burn_in: Option<usize>,
    #[arg(long = "training-use")]
    pub training_use: Option<String>,
    /// Output file for the long-format data (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render a line chart to this SVG file.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    pub format: FormatArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Compare(a) => commands::compare(a),
        Command::Sensitivity(a) => commands::sensitivity(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::BiasPlot(a) => commands::bias_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
