//! Command-line front end for `greenfde`: JSON problem configs in, CSV tables and
//! JSON reports out.

pub mod commands;
pub mod config;
pub mod format;
pub mod reproduce;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{CliError, Status};
pub use config::{ConfigError, LoadedConfig, ProblemConfig};

#[derive(Debug, Parser)]
#[command(name = "greenfde", version, about = "Solve third-order functional differential BVPs by Green-function iteration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve on the config's grid; writes the solution CSV and a JSON report.
    Solve {
        config: PathBuf,
        /// Solution CSV path; the report goes next to it as <stem>.report.json.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the existence and uniqueness hypotheses for a bound M.
    Check {
        config: PathBuf,
        #[arg(long = "M")]
        m: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Solve on several grids and tabulate N, h2, K, error and observed order.
    Study {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        grids: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-run the bundled problems and compare with reference values.
    Reproduce {
        #[arg(short, long, default_value = "reproduce")]
        output: PathBuf,
    },
}

/// Parse `args` (including the program name), run the command and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve { config, output } => commands::solve(config, output.as_deref(), out),
        Command::Check { config, m, samples } => commands::check(config, *m, *samples, out),
        Command::Study { config, grids, output } => commands::study(config, grids, output.as_deref(), out),
        Command::Reproduce { output } => reproduce::reproduce(output, out),
    };
    match result {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
