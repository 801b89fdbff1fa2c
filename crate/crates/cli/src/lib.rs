//! Command-line harness: CSV ingestion, clustering of user data, the
//! synthetic sweeps and principal-angle experiment, and theory reports.
//!
//! Every command validates its flags before computing and writes files only
//! after all results are in memory, so a failed run leaves no partial output.

pub mod args;
pub mod commands;
pub mod data;
pub mod record;
pub mod sweep;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};

/// Default worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "IPURSUIT_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Load(#[from] data::LoadError),
    #[error(transparent)]
    Core(#[from] ipursuit::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    /// 2 for bad flags or bad input files, 1 for failures while computing
    /// or writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Load(_) => 2,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn worker_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse()
                    .map_err(|_| usage(format!("{WORKERS_ENV}={v} is not a positive integer")))?,
            ),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(usage("worker count must be at least 1"));
    }
    Ok(n)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Cluster(a) => commands::cluster(a),
        Command::SynthSweep(a) => commands::synth_sweep(a),
        Command::RatioExperiment(a) => commands::ratio_experiment(a),
        Command::TheoryCheck(a) => commands::theory_check(a),
        Command::SingularValues(a) => commands::singular_values(a),
    }
}

/// Parses `argv` (program name first), runs the command, and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = worker_count(cli.workers).and_then(|workers| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = workers {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
        pool.install(|| dispatch(cli.command))
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
