//! The `trickle` command-line tool as a library, so the commands can be
//! driven in-process.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use error::CliError;

/// Parses `args` (including the program name) and runs the command.
/// Argument errors are reported as [`CliError::Usage`].
pub fn run_from<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    commands::run(cli)
}
