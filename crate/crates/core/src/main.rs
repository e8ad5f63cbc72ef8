use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cellcov::cli::{execute, CommandKind, OutputFormat, Overrides};

/// Coverage probability of cellular networks under user-count
/// threshold-based BS on/off control: closed-form sweeps, seeded Monte
/// Carlo, threshold optimization, and agreement reports.
#[derive(Parser)]
#[command(name = "cellcov", version)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the analytic coverage sweep (formulas only, no sampling)
    Analytic(RunArgs),
    /// Run the Monte Carlo sweep
    Simulate(RunArgs),
    /// Run both, join them, and report the maximum absolute gap
    Compare(RunArgs),
    /// Report coverage-maximizing thresholds (closed form and exhaustive)
    Optimize(RunArgs),
    /// Check sampled realizations against the distance, occupancy, and
    /// activity laws; prints one pass/fail line per check
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output path
    #[arg(long)]
    out: Option<String>,
    /// Override the configured output format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Override the configured trial count
    #[arg(long)]
    trials: Option<u32>,
    /// Override the configured master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (performance only; results are identical for any value)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = CliArgs::parse();
    let (kind, args) = match &cli.command {
        Command::Analytic(a) => (CommandKind::Analytic, a),
        Command::Simulate(a) => (CommandKind::Simulate, a),
        Command::Compare(a) => (CommandKind::Compare, a),
        Command::Optimize(a) => (CommandKind::Optimize, a),
        Command::Validate(a) => (CommandKind::Validate, a),
    };
    let overrides = Overrides {
        out: args.out.clone(),
        format: args.format.map(|f| match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }),
        trials: args.trials,
        seed: args.seed,
        threads: args.threads,
    };
    ExitCode::from(execute(kind, &args.config, &overrides) as u8)
}
