//! `cook`: generate hook libraries, run interference experiments and
//! summarize their metrics.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cook_core::engine::TraceFormat;
use cook_core::{Bench, Isol, RunError, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "cook",
    version,
    about = "Hook generation and GPU interference experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a hook library from an interface and a hook configuration.
    GenHooks(GenHooksArgs),
    /// Run one ⟨bench, isol, strategy⟩ configuration.
    Run(RunArgs),
    /// Tabulate the metrics of finished runs.
    Report(ReportArgs),
    /// Run every isolation mode against a list of strategies.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct GenHooksArgs {
    /// Interface declarations; defaults to the shipped runtime interface.
    #[arg(long)]
    interface: Option<PathBuf>,
    /// Exported symbol list; defaults to the shipped symbol list.
    #[arg(long)]
    exports: Option<PathBuf>,
    /// Hook configuration file.
    #[arg(
        long,
        conflicts_with = "strategy",
        required_unless_present = "strategy"
    )]
    config: Option<PathBuf>,
    /// Use the shipped hook configuration of a strategy.
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Template directory; defaults to the shipped templates.
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Settings shared by `run` and `sweep`. Flags override `--config`, and
/// `--timing` overrides the timing parameters of both.
#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    bench: Option<Bench>,
    #[arg(long)]
    seed: Option<u64>,
    /// Warmup length in measurement intervals.
    #[arg(long)]
    warmup: Option<f64>,
    /// Sampling length in measurement intervals.
    #[arg(long)]
    sample: Option<f64>,
    /// Mirrored instances in parallel mode.
    #[arg(long)]
    instances: Option<u32>,
    /// Stop each application after this many inferences.
    #[arg(long)]
    max_inferences: Option<u32>,
    /// TOML file overriding timing parameters.
    #[arg(long)]
    timing: Option<PathBuf>,
    /// TOML run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for TraceFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => TraceFormat::Json,
            Format::Csv => TraceFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    isol: Option<Isol>,
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Directory receiving metrics.json and the chronogram.
    #[arg(long)]
    out: PathBuf,
    /// Chronogram format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Run directories or metrics.json files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated strategies.
    #[arg(long, value_delimiter = ',', default_values_t = Strategy::ALL)]
    strategies: Vec<Strategy>,
    /// Seeds per cell, starting at --seed.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    seeds: u32,
    /// Cells run concurrently.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,
    /// Directory receiving sweep.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags: Vec<String> = std::env::args().skip(1).collect();
    let result = match cli.command {
        Command::GenHooks(a) => commands::gen_hooks(&a),
        Command::Run(a) => commands::run(&a, &flags),
        Command::Report(a) => commands::report(&a),
        Command::Sweep(a) => commands::sweep(&a, &flags),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if matches!(e.downcast_ref::<RunError>(), Some(RunError::Config(_))) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
