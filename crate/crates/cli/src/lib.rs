//! Command implementations behind the `bdc` binary.
//!
//! Each command is a plain function returning a report or writing a file,
//! so tests can drive them without spawning a process.

pub mod bounds;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod verify;

pub use config::{BoundId, RunConfig};
pub use error::{CliError, CliResult};

/// Runs `f` on a pool of `jobs` threads, or on the global pool when `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
