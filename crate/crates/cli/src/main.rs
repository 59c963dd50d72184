//! `qhellinger`: Kubo-Ando means, Hellinger-type divergences and barycenters
//! from the command line.
//!
//! Exit codes: 0 success, 2 input error, 3 non-convergence, 4 property
//! violation, 5 counterexample mismatch.

mod commands;
mod error;
mod format;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qhellinger::fixed_point::Metric;
use qhellinger::measure::DEFAULT_QUADRATURE_ORDER;

#[derive(Parser, Debug)]
#[command(name = "qhellinger", version, about = "Kubo-Ando means, generalized quantum Hellinger divergences and barycenters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Kubo-Ando mean A σ B.
    Mean,
    /// Divergence φ(A, B).
    Divergence,
    /// Weighted barycenter of an ensemble.
    Barycenter,
    /// Weighted power mean of order --t of an ensemble.
    PowerMean,
    /// Distance between the barycenter and the solution of the mean equation.
    Ncmeasure,
    /// Seeded property campaigns (data processing, joint convexity, axioms, convex order).
    Properties,
    /// Reproduce the 2x2 counterexample separating barycenter and power mean.
    VerifyPaper,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Frobenius,
    Thompson,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Frobenius => Metric::Frobenius,
            MetricArg::Thompson => Metric::Thompson,
        }
    }
}

#[derive(Args, Debug)]
pub struct Shared {
    /// Generator as JSON or shorthand (arcsine, geometric:0.5, harmonic:0.3, beta:0.25, log, power:0.5).
    #[arg(long, global = true, default_value = "arcsine")]
    pub generator: String,
    /// Quadrature order for representing measures.
    #[arg(long = "quad-order", global = true, default_value_t = DEFAULT_QUADRATURE_ORDER)]
    pub quad_order: usize,
    /// Residual (or relative step) tolerance of the solvers.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Iteration cap of the solvers.
    #[arg(long = "max-iter", global = true, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, global = true, value_enum, default_value_t = MetricArg::Frobenius)]
    pub metric: MetricArg,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 200)]
    pub trials: usize,
    /// Matrix dimension for property campaigns.
    #[arg(long, global = true, default_value_t = 3)]
    pub dim: usize,
    /// Order t of the power mean.
    #[arg(long, global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    /// JSON document: an ensemble, or {"a": matrix, "b": matrix}.
    #[arg(long, global = true, conflicts_with = "inline")]
    pub input: Option<PathBuf>,
    /// Inline JSON document, as for --input.
    #[arg(long, global = true)]
    pub inline: Option<String>,
    /// Matrix file for A.
    #[arg(long = "a-file", global = true)]
    pub a_file: Option<PathBuf>,
    /// Matrix file for B.
    #[arg(long = "b-file", global = true)]
    pub b_file: Option<PathBuf>,
    /// Run the data-processing campaign on a corrupted (non trace-preserving) channel.
    #[arg(long = "self-test", global = true)]
    pub self_test: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(output) => {
            emit(&output);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            if let Some(output) = failure.output {
                emit(&output);
            }
            eprintln!("qhellinger: {}", failure.error);
            ExitCode::from(failure.error.exit_code())
        }
    }
}

/// Prints to stdout, tolerating a closed pipe.
fn emit(output: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{output}");
}
