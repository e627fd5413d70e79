//! Command-line front end for `aptqfi-core`.
//!
//! ```text
//! aptqfi <command> [--config file.json] [--set key=value ...] [--out path] [--plot path]
//! ```
//!
//! Commands are `spectrum`, `steady`, `sensitivity`, `qfi`, `sweep` and
//! `evolve`. Results are written as CSV (default) or JSON tables whose
//! headers carry units; all rates are in units of Γ. Exit codes are listed
//! in [`error`].

pub mod config;
pub mod error;
pub mod plot;
pub mod run;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use config::{parse_config, Command, Format, GridSpec, OutputSpec, Overrides, RunConfig, SimSpec, Spacing};
pub use error::CliError;
pub use run::{execute, run, Artifacts};
pub use table::{Cell, Column, Table};

#[derive(Debug, Parser)]
#[command(name = "aptqfi", version, about = "Sensing with anti-PT-symmetric coupled modes")]
pub struct Args {
    pub command: Command,
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config field by dotted path, e.g. `params.delta=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Table destination (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG plot destination (sweep only).
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Args {
    pub fn to_config(&self) -> Result<RunConfig, CliError> {
        parse_config(
            self.command,
            &Overrides {
                config: self.config.as_deref(),
                set: &self.set,
                out: self.out.as_deref(),
                plot: self.plot.as_deref(),
                format: self.format,
            },
        )
    }
}

/// Parses `args`, runs, reports any failure on stderr and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match args.to_config().and_then(|c| run(&c)) {
        Ok(_) => error::EXIT_OK,
        Err(e) => {
            eprintln!("aptqfi: {e}");
            e.exit_code()
        }
    }
}
