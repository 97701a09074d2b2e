//! Command-line front end for `volswap-core`.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error, 3 series
//! divergence, 4 comparison or verification failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use volswap_core::Error as CoreError;

pub mod args;
mod commands;
pub mod config;
pub mod manifest;
pub mod output;

use args::{Cli, Command, OracleCommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGING: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(CoreError::Domain(_) | CoreError::InvalidParameter { .. } | CoreError::SeriesSingular) => {
                EXIT_USAGE
            }
            CliError::Json(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    match dispatch(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("volswap: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(args: Vec<OsString>) -> Result<i32, CliError> {
    let args = config::expand_config(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return Ok(code);
        }
    };
    configure_threads()?;
    match cli.command {
        Command::Price(a) => commands::price(&a),
        Command::Oracle(OracleCommand::Mc(a)) => commands::oracle_mc(&a),
        Command::Oracle(OracleCommand::Pde(a)) => commands::oracle_pde(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Replay(a) => replay(a.manifest, a.output),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("VOLSWAP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("VOLSWAP_THREADS must be a non-negative integer, got `{raw}`")))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn replay(path: PathBuf, output: Option<PathBuf>) -> Result<i32, CliError> {
    let text =
        std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let manifest = manifest::RunManifest::load(&text)?;
    if manifest.command.split_whitespace().next() == Some("replay") {
        return Err(CliError::Usage(String::from("a replay manifest cannot be replayed")));
    }
    let mut argv = vec![OsString::from("volswap")];
    argv.extend(manifest.to_args().into_iter().map(OsString::from));
    if let Some(out) = output {
        argv.push(OsString::from("--output"));
        argv.push(out.into_os_string());
    }
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| CliError::Usage(format!("manifest does not describe a valid run: {e}")))?;
    match cli.command {
        Command::Price(a) => commands::price(&a),
        Command::Oracle(OracleCommand::Mc(a)) => commands::oracle_mc(&a),
        Command::Oracle(OracleCommand::Pde(a)) => commands::oracle_pde(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Replay(_) => Err(CliError::Usage(String::from("a replay manifest cannot be replayed"))),
    }
}
