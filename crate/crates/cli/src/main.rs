//! `ppbench` command-line interface.
//!
//! Exit status: 0 on success, 1 for usage or input errors, 2 when a
//! computation fails.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod input;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use ppbench::benchmark::{thread_cap_from_env, THREADS_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "ppbench",
    version,
    about = "Plotting positions, probability-paper fits and plotting-position benchmarks",
    after_help = "Environment: PPBENCH_THREADS caps the number of worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print plotting positions for a sample size.
    Positions(PositionsArgs),
    /// Fit location and scale to a sample on probability paper.
    Fit(FitArgs),
    /// Fit a sample and estimate quantiles at return periods.
    Quantile(QuantileArgs),
    /// Monte Carlo comparison of plotting positions (IQSE, IFSE, DSE).
    Benchmark(BenchmarkArgs),
    /// Modified Anderson-Darling normality test.
    Gof(GofArgs),
    /// Analyse the bundled 1983-84 Campi Flegrei magnitude catalogue.
    Bradyseism(BradyseismArgs),
    /// Draw a sample on probability paper as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Gumbel,
    Normal,
}

impl From<FamilyArg> for ppbench::Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gumbel => ppbench::Family::Gumbel,
            FamilyArg::Normal => ppbench::Family::Normal,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParentArg {
    Gumbel,
    Normal,
    /// Log-normal with threshold (use --threshold).
    Lognormal3,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Ols,
    Gls,
    Mle,
}

impl From<MethodArg> for ppbench::FitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ols => ppbench::FitMethod::Ols,
            MethodArg::Gls => ppbench::FitMethod::Gls,
            MethodArg::Mle => ppbench::FitMethod::Mle,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegressionArg {
    Ols,
    Gls,
}

impl From<RegressionArg> for ppbench::FitMethod {
    fn from(m: RegressionArg) -> Self {
        match m {
            RegressionArg::Ols => ppbench::FitMethod::Ols,
            RegressionArg::Gls => ppbench::FitMethod::Gls,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CovModeArg {
    Expansion,
    Exact,
    Diagonal,
    Identity,
}

impl From<CovModeArg> for ppbench::CovMode {
    fn from(m: CovModeArg) -> Self {
        match m {
            CovModeArg::Expansion => ppbench::CovMode::Expansion,
            CovModeArg::Exact => ppbench::CovMode::Exact,
            CovModeArg::Diagonal => ppbench::CovMode::Diagonal,
            CovModeArg::Identity => ppbench::CovMode::Identity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GridArg {
    /// Nodes equally spaced in ln(F / (1 - F)).
    Logit,
    /// Nodes equally spaced in F.
    Uniform,
}

#[derive(Debug, Args)]
struct PositionsArgs {
    /// Plotting-position rule (e.g. weibull, hazen, blom, taylor).
    #[arg(long)]
    formula: String,
    /// Sample size.
    #[arg(long)]
    n: usize,
    /// Parent family for the taylor rule.
    #[arg(long, value_enum, default_value = "normal")]
    family: FamilyArg,
    /// Expansion order for the taylor rule.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Output format.
    #[arg(long = "out", value_enum, default_value = "csv")]
    format: TableFormat,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct FitOptions {
    /// CSV file with a single `value` column.
    #[arg(long)]
    input: std::path::PathBuf,
    /// Parent distribution of the observations.
    #[arg(long, value_enum, default_value = "gumbel")]
    parent: ParentArg,
    /// Threshold c of the log-normal parent.
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    /// Plotting-position rule.
    #[arg(long, default_value = "taylor")]
    formula: String,
    /// Expansion order for the taylor rule.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Estimation method.
    #[arg(long, value_enum, default_value = "ols")]
    method: MethodArg,
    /// Covariance used by GLS.
    #[arg(long, value_enum, default_value = "expansion")]
    cov_mode: CovModeArg,
    /// Drop observations at or below the threshold instead of failing.
    #[arg(long)]
    exclude_at_threshold: bool,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    fit: FitOptions,
    /// Write the JSON report to this file instead of standard output.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct QuantileArgs {
    #[command(flatten)]
    fit: FitOptions,
    /// Return periods T > 1, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    return_period: Vec<f64>,
    /// Output format.
    #[arg(long = "out", value_enum, default_value = "json")]
    format: TableFormat,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    /// Parent family.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Sample size.
    #[arg(long)]
    n: usize,
    /// Number of Monte Carlo replicates.
    #[arg(long, default_value_t = 10_000)]
    m: usize,
    /// Seed of the random stream.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated rules, or `all` for the full catalogue.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    formulas: Vec<String>,
    /// Expansion order for the taylor rule.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Leave out the maximum-likelihood baseline.
    #[arg(long)]
    no_mle: bool,
    /// Regression used for the plotting positions.
    #[arg(long, value_enum, default_value = "ols")]
    method: RegressionArg,
    /// Covariance used by GLS.
    #[arg(long, value_enum, default_value = "expansion")]
    cov_mode: CovModeArg,
    /// Layout of the integration nodes over F.
    #[arg(long, value_enum, default_value = "logit")]
    grid: GridArg,
    /// Number of integration nodes (default 641 logit, 399 uniform).
    #[arg(long)]
    grid_nodes: Option<usize>,
    /// Sampling location (the indices do not depend on it).
    #[arg(long, default_value_t = 0.0)]
    location: f64,
    /// Sampling scale (the indices are reported per unit scale).
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Output format.
    #[arg(long = "out", value_enum, default_value = "json")]
    format: TableFormat,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct GofArgs {
    /// CSV file with a single `value` column.
    #[arg(long)]
    input: std::path::PathBuf,
    /// Test ln(x - c) instead of x; values at or below c are dropped.
    #[arg(long)]
    log_threshold: Option<f64>,
    /// `self` to estimate mean and sd, or `fixed:MEAN,SD`.
    #[arg(long, default_value = "self")]
    params: String,
    /// Write the JSON report to this file instead of standard output.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct BradyseismArgs {
    /// Lunar month I..XIII, or `all`.
    #[arg(long, default_value = "all")]
    month: String,
    /// Plotting-position rule.
    #[arg(long, default_value = "taylor")]
    positions: String,
    /// Expansion order for the taylor rule.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Regression method.
    #[arg(long, value_enum, default_value = "ols")]
    method: RegressionArg,
    /// Covariance used by GLS.
    #[arg(long, value_enum, default_value = "expansion")]
    cov_mode: CovModeArg,
    /// Log-normal threshold c.
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    /// Magnitude whose exceedance probability is reported.
    #[arg(long, default_value_t = 5.0)]
    critical_magnitude: f64,
    /// Directory for report.json, exceedance.csv and one SVG per month.
    /// Without it the JSON report goes to standard output.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[command(flatten)]
    fit: FitOptions,
    /// Plot title.
    #[arg(long, default_value = "Probability paper")]
    title: String,
    /// Leave out the fitted line.
    #[arg(long)]
    no_line: bool,
    /// SVG file to write.
    #[arg(long)]
    output: std::path::PathBuf,
}

/// Errors sorted by exit status.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Compute(ppbench::Error),
}

impl From<ppbench::Error> for CliError {
    fn from(e: ppbench::Error) -> Self {
        CliError::Compute(e)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let cap = thread_cap_from_env()
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cap)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure worker threads: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = configure_threads().and_then(|_| commands::run(cli.command));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
