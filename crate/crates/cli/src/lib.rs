//! Command-line front end: parameter sweeps, curves, sampling and the exact
//! small-chain oracle, written as CSV artifacts with JSON mirrors.
//!
//! Every artifact starts with `# key = value` metadata lines (tool version,
//! seed, config hash, canonical job, timestamp). Runs of the same job produce
//! byte-identical artifacts apart from the `generated` line.

pub mod error;
pub mod jobs;
pub mod output;
pub mod spec;

use std::path::PathBuf;

use clap::Parser;

pub use error::CliError;
pub use spec::{Cli, JobSpec};

/// Runs a parsed command line and returns the artifacts written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let stem = cli.output.name.clone().unwrap_or_else(|| cli.job.name().to_string());
    jobs::run_job(&cli.job, &cli.output.out_dir, &stem)
}

/// Parses raw arguments, folding in the `--config` file if one is named.
pub fn parse_args(args: Vec<String>) -> Result<Cli, clap::Error> {
    let args = match spec::config_path(&args) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                clap::Error::raw(clap::error::ErrorKind::Io, format!("cannot read {}: {e}\n", path.display()))
            })?;
            let extra = spec::config_arguments(&text).map_err(|e| {
                clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{}: {e}\n", path.display()))
            })?;
            spec::merge_config(args, &extra)
        }
        None => args,
    };
    Cli::try_parse_from(args)
}

/// Entry point shared by the binary and the tests: returns the exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let cli = match parse_args(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                let _ = e.print();
                return error::EXIT_OK;
            }
            let err = if e.kind() == ErrorKind::Io {
                CliError { error: "io", exit_code: error::EXIT_IO, message: e.to_string() }
            } else {
                CliError::invalid(e.to_string().trim())
            };
            eprintln!("{}", err.to_json());
            return err.exit_code;
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            error::EXIT_OK
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code
        }
    }
}
