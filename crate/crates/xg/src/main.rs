use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xg::{execute, outcome_code, thread_count, CommandKind, THREADS_VAR};

/// Extended Galerkin experiments.
#[derive(Debug, Parser)]
#[command(name = "xg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Paths {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the CSV and Markdown artifacts.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve on the finest configured mesh and report errors.
    Solve(Paths),
    /// Convergence table over the configured levels.
    Eoc(Paths),
    /// Discrete inf-sup constants over (ρ, n).
    Infsup(Paths),
    /// Distance to the conforming limit as ρ → 0.
    Limit(Paths),
    /// β_h and elimination check for every classical-scheme preset.
    Zoo(Paths),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, paths) = match cli.command {
        Command::Solve(p) => (CommandKind::Solve, p),
        Command::Eoc(p) => (CommandKind::Eoc, p),
        Command::Infsup(p) => (CommandKind::Infsup, p),
        Command::Limit(p) => (CommandKind::Limit, p),
        Command::Zoo(p) => (CommandKind::Zoo, p),
    };
    let threads = match thread_count(std::env::var(THREADS_VAR).ok().as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("xg: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match execute(kind, &paths.config, &paths.out, threads) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{}", c.line());
            }
            for (name, _) in &outcome.artifacts {
                println!("wrote {}", paths.out.join(name).display());
            }
            ExitCode::from(outcome_code(&outcome))
        }
        Err(e) => {
            eprintln!("xg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
