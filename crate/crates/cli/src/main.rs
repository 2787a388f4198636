//! `it2garch` command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "it2garch", version, about = "GARCH-driven interval type-2 fuzzy forecasting")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true)]
    confidence: Option<f64>,
    #[arg(long, global = true)]
    iterations: Option<usize>,
    /// Draw horizon shocks from a seeded normal instead of using E[eps^2] = 1.
    #[arg(long, global = true)]
    stochastic: bool,
    /// Use the deterministic coordinate-grid optimizer.
    #[arg(long, global = true)]
    coordinate_grid: bool,
    /// Start the variance recursion from zero instead of the first window.
    #[arg(long, global = true)]
    zero_initial_variance: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a simulated GARCH(1,1) series to <out-dir>/series.csv.
    Simulate {
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        alpha1: Option<f64>,
        #[arg(long)]
        beta1: Option<f64>,
        #[arg(long)]
        mean: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Train on a CSV column and write <out-dir>/model.json.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        columns: Columns,
    },
    /// Rolling forecasts from every window of a CSV column.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        columns: Columns,
    },
    /// Run the dataset-by-model grid listed in the config file.
    Benchmark,
    /// Ljung-Box test on a residual column.
    Diagnose {
        #[arg(long)]
        residuals: PathBuf,
        /// Lag count h.
        #[arg(long)]
        lags: Option<usize>,
        #[command(flatten)]
        columns: Columns,
    },
}

#[derive(Debug, Args)]
struct Columns {
    /// Value column: header name or zero-based index.
    #[arg(long)]
    column: Option<String>,
    #[arg(long)]
    timestamp_column: Option<String>,
}

impl Columns {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(c) = &self.column {
            cfg.value_column = c.clone();
        }
        if let Some(c) = &self.timestamp_column {
            cfg.timestamp_column = Some(c.clone());
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let c = &cli.common;
    let mut cfg = RunConfig::load(c.config.as_deref())?;
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = c.$field.clone() {
                cfg.$field = v;
            }
        )*};
    }
    set!(seed, out_dir, window, steps, confidence, iterations);
    if c.stochastic {
        cfg.epsilon_mode = it2garch::EpsilonMode::Stochastic;
    }
    if c.coordinate_grid {
        cfg.optimizer = it2garch::OptimizerKind::CoordinateGrid;
    }
    if c.zero_initial_variance {
        cfg.initial_variance_mode = it2garch::InitialVarianceMode::Zero;
    }
    match &cli.command {
        Command::Simulate { omega, alpha1, beta1, mean, n } => {
            cfg.omega = omega.unwrap_or(cfg.omega);
            cfg.alpha1 = alpha1.unwrap_or(cfg.alpha1);
            cfg.beta1 = beta1.unwrap_or(cfg.beta1);
            cfg.mean = mean.unwrap_or(cfg.mean);
            cfg.n = n.unwrap_or(cfg.n);
        }
        Command::Train { columns, .. } | Command::Predict { columns, .. } => columns.apply(&mut cfg),
        Command::Diagnose { lags, columns, .. } => {
            columns.apply(&mut cfg);
            cfg.ljung_box_lags = lags.unwrap_or(cfg.ljung_box_lags);
        }
        Command::Benchmark => {}
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    let base = cli
        .common
        .config
        .as_deref()
        .and_then(|p| p.parent())
        .map(PathBuf::from)
        .unwrap_or_default();
    match &cli.command {
        Command::Simulate { .. } => commands::simulate(&cfg),
        Command::Train { data, .. } => commands::train(&cfg, data),
        Command::Predict { model, data, .. } => commands::predict(&cfg, model, data),
        Command::Benchmark => commands::benchmark(&cfg, &base),
        Command::Diagnose { residuals, .. } => commands::diagnose(&cfg, residuals),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
