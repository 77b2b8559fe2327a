use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gpflow_cli::commands::{self, CommonArgs};

/// Ground states of the rotating Gross-Pitaevskii energy via projected
/// Sobolev gradient flows.
#[derive(Parser)]
#[command(name = "gpflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the seed of the random initial state.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one gradient flow and write trace, final field, and summary.
    Solve(ConfigArgs),
    /// Run all three schemes side by side with optimal steps.
    Dissipation(ConfigArgs),
    /// Fixed-step convergence-rate study from a near-ground start.
    FixedStep(ConfigArgs),
    /// Convergence rates across grid resolutions.
    MeshStudy(ConfigArgs),
    /// Phase-align two field files and print their quotient distances.
    Align { a: PathBuf, b: PathBuf },
    /// Check the trapping-vs-centrifugal admissibility condition.
    Check(ConfigArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = |c: ConfigArgs| CommonArgs {
        config: c.config,
        out: c.out,
        seed: c.seed,
        quiet: cli.quiet,
    };
    let result = match cli.command {
        Command::Solve(c) => commands::solve::run(&common(c)),
        Command::Dissipation(c) => commands::dissipation::run(&common(c)),
        Command::FixedStep(c) => commands::fixed_step::run(&common(c)),
        Command::MeshStudy(c) => commands::mesh_study::run(&common(c)),
        Command::Align { a, b } => commands::align::run(&a, &b),
        Command::Check(c) => commands::check::run(&common(c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("gpflow: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
