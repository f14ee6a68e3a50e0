//! Command-line frontend of the `bandwagon` market model: flag and config
//! parsing, tabulated-distribution input and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod io;

pub use config::{Cli, RunConfig};
pub use error::{CliError, Result};

/// Validates `cli` and runs it, writing reports to standard output.
pub fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::from_cli(cli)?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    commands::run(&cfg, &mut lock)
}
