//! Command-line front end: system-file loading, subcommand dispatch and
//! reproducible result files.

pub mod commands;
pub mod error;
pub mod output;
pub mod schema;

pub use commands::{run, Cli, Command, RunManifest};
pub use error::CliError;
pub use schema::{load_system, LoadedSystem, SystemFile};

/// Caps the global thread pool from `GIBBSLAB_THREADS`, when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("GIBBSLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(vec![format!("GIBBSLAB_THREADS must be a positive integer, got {raw:?}")]))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))
}
