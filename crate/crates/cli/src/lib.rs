//! `pll-lockin` command-line front end.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sampling;

use clap::Parser;

pub use config::{Cli, RunConfig};
pub use error::{CliError, CliResult};

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match RunConfig::resolve(cli).and_then(|cfg| commands::run(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
