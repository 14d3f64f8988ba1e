//! Command-line surface for `sfsph-core`.
//!
//! Every command writes one table plus the resolved run parameters, either
//! to stdout or to `--out`. Exit codes: 0 success, 2 invalid input, 3
//! numerical failure, 1 I/O failure.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod output;

pub use output::{Document, Format, Value};

pub const PROGRAM: &str = "sfsph";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "sfsph", version, about = "Exact SFS distributions under the coalescent")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// States and rates of the block-counting process.
    Statespace {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Marginal pmfs of every i-ton count.
    Sfs {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact pmf of an integer weighted statistic.
    Intweight {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[command(flatten)]
        statistic: StatisticArgs,
        #[arg(long, default_value_t = 40)]
        kmax: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Coefficients and variances of the classical estimators, the tests and the BLUE.
    Estimators {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// CDF of a linear statistic by characteristic-function inversion.
    NeutralityCdf {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[command(flatten)]
        statistic: StatisticArgs,
        /// Lattice size, a power of two.
        #[arg(long = "grid-H")]
        grid_h: Option<usize>,
        /// Frequency step.
        #[arg(long = "grid-eta", allow_negative_numbers = true)]
        grid_eta: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo sample of the SFS.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[command(flatten)]
        statistic: StatisticArgs,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct StatisticArgs {
    /// Coefficients c_1,...,c_{n-1}.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "stat")]
    pub coeffs: Option<Vec<f64>>,
    /// Named statistic, e.g. watterson or taj_D.
    #[arg(long)]
    pub stat: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sfsph_core::Error> for CliError {
    fn from(e: sfsph_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

/// Runs a parsed command and writes its output.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (doc, output) = commands::dispatch(&cli.command)?;
    let text = doc.render(output.format);
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
