use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use env_logger::Env;

mod commands;

use commands::CliError;

/// Sparse automatic differentiation demos and benchmarks.
#[derive(Debug, Parser)]
#[command(name = "sad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the Jacobian sparsity pattern.
    Pattern(CommonArgs),
    /// Print the Jacobian values.
    Jacobian(JacobianArgs),
    /// Solve for a steady or consistent state with Newton's method.
    Solve(CommonArgs),
    /// Integrate a DAE model with fixed-step implicit Euler.
    Simulate(SimulateArgs),
    /// Time sparse residual and Jacobian evaluation over load counts.
    BenchScaling(BenchArgs),
    /// Compare sparse and dense-gradient evaluation over load counts.
    BenchDense(BenchArgs),
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// lorenz, microgrid or decay.
    #[arg(long, default_value = "lorenz")]
    pub model: String,
    /// Number of microgrid loads.
    #[arg(short = 'N', default_value_t = 1)]
    pub n: usize,
    /// Step size whose inverse weights the derivative terms of DAE models.
    #[arg(long)]
    pub h: Option<f64>,
    /// Seed for random evaluation states.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Lorenz: make the parameters the unknowns instead of the state.
    #[arg(long)]
    pub swap_roles: bool,
    /// Output file; prefix with `mm:` for MatrixMarket.
    #[arg(long)]
    pub out: Option<String>,
    /// File of `key = value` parameter overrides.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JacobianArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Significant digits in the printed values (default: exact).
    #[arg(long)]
    pub digits: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0.1)]
    pub t_end: f64,
    /// Keep every k-th step in the output.
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated load counts.
    #[arg(short = 'N', value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub reps: usize,
    /// Evaluations per timed batch.
    #[arg(long, default_value_t = 5)]
    pub calls: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// CSV output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script for the CSV here.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::new().filter_or("SAD_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pattern(a) => commands::pattern(&a),
        Command::Jacobian(a) => commands::jacobian(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::BenchScaling(a) => commands::bench_scaling(&a),
        Command::BenchDense(a) => commands::bench_dense(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
