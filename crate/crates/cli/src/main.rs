mod density;
mod error;
mod fit;
mod impute;
mod io;
mod refine;
mod report;
mod transform;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

/// Density estimation and imputation for tables with missing values.
#[derive(Debug, Parser)]
#[command(name = "hcr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model to a table and write the model file.
    Fit(FitArgs),
    /// Fill missing cells of a table.
    Impute(ImputeArgs),
    /// Evaluate the density at a point, or tabulate a one-coordinate slice.
    Density(DensityArgs),
    /// Improve a model's log-likelihood by gradient ascent.
    Refine(RefineArgs),
    /// Print the coefficients of a model with interpretive labels.
    Report(ReportArgs),
    /// Map table columns to [0, 1] and back.
    Transform(TransformArgs),
}

#[derive(Debug, Args)]
struct TableFlags {
    /// Input table (character-separated, with a header row).
    #[arg(long)]
    input: PathBuf,
    /// Cell delimiter: a single character, or `tab`.
    #[arg(long, default_value = ",")]
    delimiter: String,
    /// Comma-separated tokens read as missing; empty cells are always missing.
    #[arg(long, default_value = "NA,nan,?")]
    missing_tokens: String,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    table: TableFlags,
    /// Column schema (one `name: key=value, ...` line per column).
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Max order per correlation level: the first entry is for single
    /// coordinates, the second for pairs, and so on [default: 2,2].
    #[arg(long)]
    orders: Option<String>,
    /// Only fit these coordinate subsets, e.g. `1;2;1,2` (1-based); uses the
    /// first entry of --orders as the order.
    #[arg(long)]
    subsets: Option<String>,
    /// Family for continuous columns the schema does not mark as trig.
    #[arg(long, value_enum, default_value_t = FamilyArg::Legendre)]
    family: FamilyArg,
    /// Drop coefficients below this many standard errors.
    #[arg(long)]
    prune: Option<f64>,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Legendre,
    Trig,
}

#[derive(Debug, Args)]
struct ImputeArgs {
    #[command(flatten)]
    table: TableFlags,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value_t = PolicyArg::Expected)]
    policy: PolicyArg,
    /// Add a variance column per model coordinate (in [0, 1] units).
    #[arg(long)]
    report: bool,
    /// Output table; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Expected,
    TopMode,
    ClusterSplit,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated point in model coordinates; at most one `?`.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Rows of the slice table.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Slice table; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RefineArgs {
    #[command(flatten)]
    table: TableFlags,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Initial step length of each ascent step.
    #[arg(long, default_value_t = 0.1)]
    rate: f64,
    /// Ridge weight on the squared non-constant coefficients.
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Smallest density allowed at any record.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Offsets the quasi-random witness search in diagnostics.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Objective trace table; standard output when absent.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Refined model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[command(flatten)]
    table: TableFlags,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Direction::Forward)]
    direction: Direction,
    /// Transform table: written by forward, read by backward.
    #[arg(long)]
    transforms: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Direction {
    Forward,
    Backward,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => fit::run(a),
        Command::Impute(a) => impute::run(a),
        Command::Density(a) => density::run(a),
        Command::Refine(a) => refine::run(a),
        Command::Report(a) => report::run(a),
        Command::Transform(a) => transform::run(a),
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
            eprintln!("hcr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
