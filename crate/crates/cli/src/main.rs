//! `cnr`: compute c-numerical ranges, classify weight vectors and run
//! preserver verification from the command line.

mod commands;
mod error;
mod input;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cnrange::AmbientDim;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cnr", version, about = "c-numerical ranges of matrices and operators")]
struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, env = "CNR_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Boundary of W_c(A) with radius, symmetry and ellipse summary.
    Range(RangeArgs),
    /// Regime of a weight vector and whether r_c is a norm.
    Classify(ClassifyArgs),
    /// Check a preserver map against its expected outcome.
    Verify(VerifyArgs),
    /// Compare random frame samples with the computed region.
    Oracle(OracleArgs),
    /// Fit an ellipse to the support function of W_c(A).
    EllipseFit(EllipseFitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Json,
}

/// Operator and weight inputs shared by the matrix commands.
#[derive(Debug, Args)]
pub struct OperatorArgs {
    /// Matrix file, JSON (`{"rows","cols","data":[[re,im],...]}`) or CSV.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Weight vector, non-increasing, e.g. `1,0,-1`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
    /// `finite:N` or `infinite`; defaults to the matrix size.
    #[arg(long)]
    pub ambient: Option<AmbientDim>,
    /// Number of support-function angles.
    #[arg(long, default_value_t = 720)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[command(flatten)]
    pub op: OperatorArgs,
    /// Oracle samples to overlay on SVG output and check in the summary.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
    /// Print JSON instead of text.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Preserver description (JSON).
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// JSONL report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub op: OperatorArgs,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `json` for the report, `csv` for the sample cloud.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EllipseFitArgs {
    #[command(flatten)]
    pub op: OperatorArgs,
    /// Relative residual above which the region is not an ellipse.
    #[arg(long, default_value_t = cnrange::closedform::NON_ELLIPSE_RTOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot configure {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Range(args) => commands::range(&args),
        Command::Classify(args) => commands::classify(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Oracle(args) => commands::oracle(&args),
        Command::EllipseFit(args) => commands::ellipse_fit(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(error::EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cnr: {e}");
            ExitCode::from(e.code)
        }
    }
}
