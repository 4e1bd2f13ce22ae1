//! Configuration-driven experiments on top of `xg-core`: convergence tables,
//! inf-sup sweeps, `ρ → 0` limit studies and the classical-scheme zoo, written
//! as CSV plus a Markdown summary.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

use std::fs;
use std::path::Path;

pub use config::{CommandKind, Experiment};
pub use error::CliError;
pub use run::{run, Outcome};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "XG_THREADS";

/// Worker count from `XG_THREADS`; `None` leaves the choice to rayon.
pub fn thread_count(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{v}`"))),
        },
    }
}

/// Parses, validates and runs one experiment, then writes its artifacts
/// into `out`. Nothing is written unless the experiment ran to completion.
pub fn execute(command: CommandKind, config: &Path, out: &Path, threads: Option<usize>) -> Result<Outcome, CliError> {
    let exp = Experiment::from_path(config, command)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    let outcome = pool.install(|| run(&exp))?;
    fs::create_dir_all(out)?;
    for (name, contents) in &outcome.artifacts {
        fs::write(out.join(name), contents)?;
    }
    Ok(outcome)
}

/// Exit status: 0 when every configured check passed, 1 otherwise.
pub fn outcome_code(outcome: &Outcome) -> u8 {
    if outcome.passed() { 0 } else { 1 }
}
