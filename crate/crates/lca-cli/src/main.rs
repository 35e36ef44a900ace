//! `lca` — fit, select, classify, and report latent class models for
//! categorical survey data from the command line.

mod commands;
mod config;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "lca",
    version,
    about = "Latent class analysis for categorical survey data",
    after_help = "Flags override values from --config; --config overrides built-in defaults. \
The LCA_SEED environment variable supplies a default seed when --seed is absent."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an R-class model and write the model document
    Fit(FitArgs),
    /// Fit a range of class counts and select one by information criterion
    Sweep(SweepArgs),
    /// Posterior class membership for a dataset under a fitted model
    Classify(ClassifyArgs),
    /// Class profiles and extreme-response-bias report for a fitted model
    Report(ReportArgs),
    /// Draw a synthetic dataset from known parameters
    Simulate(SimulateArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON config file supplying defaults for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Field delimiter of data files: comma or tab
    #[arg(long)]
    delimiter: Option<String>,
}

#[derive(Args, Clone)]
struct EmArgs {
    /// Independent EM restarts
    #[arg(long)]
    restarts: Option<usize>,
    /// Maximum EM iterations per restart
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Relative log-likelihood convergence tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Master seed (defaults to $LCA_SEED, else a generated value)
    #[arg(long)]
    seed: Option<u64>,
    /// Lower clamp applied to conditional probabilities after each M-step
    #[arg(long)]
    floor: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    /// Response data file (delimited text with a header row)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Survey schema (JSON)
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Number of latent classes
    #[arg(long)]
    classes: Option<usize>,
    /// Output model document
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: json (model document) or delimited (summary row)
    #[arg(long)]
    format: Option<String>,
    #[command(flatten)]
    em: EmArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Inclusive class-count range, e.g. 2..6
    #[arg(long = "class-range")]
    class_range: Option<String>,
    /// Selection criterion: AIC or BIC
    #[arg(long)]
    criterion: Option<String>,
    /// Output file for the sweep summary
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for --out: json or delimited
    #[arg(long)]
    format: Option<String>,
    #[command(flatten)]
    em: EmArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Fitted model document
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output assignments table
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Fitted model document
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Dominance threshold for class characterization
    #[arg(long)]
    threshold: Option<f64>,
    /// Comma-separated class display names, in class order
    #[arg(long)]
    labels: Option<String>,
    /// 1-based class treated as the optimist response style
    #[arg(long = "optimist-class")]
    optimist_class: Option<usize>,
    /// 1-based class treated as the pessimist response style
    #[arg(long = "pessimist-class")]
    pessimist_class: Option<usize>,
    /// Proceed even if the model document is marked non-converged
    #[arg(long = "allow-unconverged", default_value_t = false)]
    allow_unconverged: bool,
    /// Output stem; writes <stem>.json, <stem>.profiles.<ext>, <stem>.bias.<ext>
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model document holding the generating parameters
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Number of rows to draw
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output data file; the truth sidecar gets a .truth.json suffix
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fit(args) => commands::fit(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Classify(args) => commands::classify(args),
        Command::Report(args) => commands::report(args),
        Command::Simulate(args) => commands::simulate(args),
    }
}
