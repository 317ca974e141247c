mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwm::inference::Family;
use gwm::GwmError;

/// Generalized Whittle–Matérn fields: evaluate, simulate, estimate.
#[derive(Debug, Parser)]
#[command(name = "gwm", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Covariance, variogram and their asymptotes at chosen lags (CSV).
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        lags: LagArgs,
        #[command(flatten)]
        quad: QuadArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw one field on a regular grid.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Points per axis: `2190` or `256x256`.
        #[arg(long)]
        grid: String,
        /// Spacing per axis: `0.5` or `0.5x0.25`.
        #[arg(long, default_value = "1")]
        spacing: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SimFormat::Csv)]
        format: SimFormat,
        /// Required for `--format raw` (a `.json` sidecar is written beside it).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Local and global sample-path properties (JSON).
    Props {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Welch or raw periodogram of a series (CSV).
    Psd {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = PsdMethod::Welch)]
        method: PsdMethod,
        #[arg(long, default_value_t = 73)]
        block_len: usize,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical variogram of a series with the sample-variance marker (CSV).
    Variogram {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 100)]
        max_lag: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum-likelihood fit of the four-parameter time-series family.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = FamilyArg::Gwm)]
        family: FamilyArg,
        /// Semicolon-separated `alpha,gamma,ell` triples; default is the
        /// built-in grid.
        #[arg(long)]
        starts: Option<String>,
        /// Lags in the variogram overlay.
        #[arg(long, default_value_t = 100)]
        max_lag: usize,
        /// Directory for `fit.json`, `psd.csv` and `variogram.csv`; without
        /// it the fit JSON goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Validate a wind file and report its checksum and the selected span.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1)]
    pub dim: u32,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct LagArgs {
    /// Comma-separated lags.
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    /// `lo:hi:count`, log-spaced.
    #[arg(long)]
    pub r_range: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    /// Relative tolerance of the covariance quadrature.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `wind`: the 15-column daily file, deseasonalized before use.
    /// `series`: one value per line, only mean-centered.
    /// `csv`: the `value` column of a headed CSV such as `simulate` writes,
    /// only mean-centered.
    #[arg(long, value_enum, default_value_t = InputFormat::Wind)]
    pub format: InputFormat,
    /// Station name (e.g. `RPT`) or 1-based station column.
    #[arg(long, default_value = "RPT")]
    pub station: String,
    /// Inclusive year range, e.g. `1973-1978` (two or four digits).
    #[arg(long, default_value = "1973-1978")]
    pub years: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Wind,
    Series,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimFormat {
    Csv,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PsdMethod {
    Welch,
    Periodogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Wm,
    Gwm,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Wm => Family::Wm,
            FamilyArg::Gwm => Family::Gwm,
        }
    }
}

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

fn exit_code(e: &GwmError) -> u8 {
    use GwmError::*;
    match e {
        InvalidParameter(_) | Domain(_) | GammaPole(_) | InfiniteVariance { .. } | VarianceBoundary(_) => EXIT_USAGE,
        Parse { .. } | InsufficientData(_) | Io(_) => EXIT_DATA,
        Quadrature { .. }
        | Embedding(_)
        | NotPositiveDefinite(_)
        | IllConditioned { .. }
        | Optimization(_)
        | Degenerate(_) => EXIT_NUMERICAL,
    }
}

/// Thread-count override for the worker pool.
pub const THREADS_ENV: &str = "GWM_THREADS";

fn configure_threads() -> Result<(), GwmError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| GwmError::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| GwmError::InvalidParameter(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let run = configure_threads().and_then(|_| commands::run(cli.command));
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gwm: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
