//! Experiment runner for the link-level simulator: named sweeps configured
//! from JSON, emitting plot-ready `results.csv`, aggregate `summary.json`,
//! and a `manifest.json` that reproduces the run exactly.

pub mod config;
pub mod experiments;
pub mod output;

use std::time::Instant;

use thiserror::Error;

/// Runner errors split by exit code: configuration problems exit with 2,
/// runtime failures with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<isac_core::Error> for CliError {
    fn from(e: isac_core::Error) -> Self {
        match e {
            isac_core::Error::Config(_) | isac_core::Error::OutOfRange(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

/// Resolve the configuration, run the selected experiment, write results.
pub fn run(args: config::Args) -> Result<(), CliError> {
    init_thread_pool()?;
    let resolved = config::resolve(args)?;
    let started = Instant::now();
    let out = experiments::dispatch(&resolved)?;
    output::write_all(&resolved, &out, started.elapsed())
}

/// Honor ISAC_BENCH_THREADS as a cap on the rayon worker pool.
fn init_thread_pool() -> Result<(), CliError> {
    match std::env::var("ISAC_BENCH_THREADS") {
        Ok(raw) => {
            let threads: usize = raw.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "ISAC_BENCH_THREADS must be a positive integer, got {raw:?}"
                ))
            })?;
            if threads == 0 {
                return Err(CliError::Config(
                    "ISAC_BENCH_THREADS must be a positive integer, got 0".into(),
                ));
            }
            // A global pool may already exist when run() is called twice in
            // one process (tests); the first configuration wins.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            Ok(())
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::Config(format!("ISAC_BENCH_THREADS: {e}"))),
    }
}
