//! IO companion for the lipsyn toolkit: file formats (feature/motion CSV,
//! corpus manifests, checkpoints, training logs, preference tables, FAP
//! streams, SVG plots, WAV input) and the command-line surface.
//!
//! All numeric text output uses Rust's shortest round-trip float formatting,
//! so files parse back bit-exactly and reruns with the same seed produce
//! byte-identical artifacts.

pub mod commands;
pub mod config;
pub mod formats;
pub mod svgplot;
pub mod wav;

use std::fmt;
use std::path::PathBuf;

/// Exit codes shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    /// Success.
    Ok = 0,
    /// Bad usage (unknown flags, missing arguments).
    Usage = 1,
    /// Malformed or inconsistent input data.
    Data = 2,
    /// Numerical failure (divergence, non-finite values).
    Numeric = 3,
}

/// Errors carrying the exit code they map to.
#[derive(Debug)]
pub enum CliError {
    /// Usage error.
    Usage(String),
    /// Data error (IO and parsing included).
    Data(String),
    /// Numerical failure.
    Numeric(String),
}

impl CliError {
    /// The process exit code for this error.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::Usage,
            CliError::Data(_) => ExitCode::Data,
            CliError::Numeric(_) => ExitCode::Numeric,
        }
    }

    /// Usage error from anything printable.
    pub fn usage(msg: impl fmt::Display) -> CliError {
        CliError::Usage(msg.to_string())
    }

    /// Data error from anything printable.
    pub fn data(msg: impl fmt::Display) -> CliError {
        CliError::Data(msg.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<lipsyn_core::Error> for CliError {
    fn from(e: lipsyn_core::Error) -> CliError {
        match e {
            lipsyn_core::Error::NonFinite { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

/// Result alias for command implementations.
pub type CliResult<T> = Result<T, CliError>;

/// Resolve a path relative to a base directory unless it is absolute.
pub fn resolve_path(base: &std::path::Path, p: &str) -> PathBuf {
    let candidate = PathBuf::from(p);
    if candidate.is_absolute() {
        candidate
    } else {
        base.join(candidate)
    }
}

/// Run the CLI with the given arguments (excluding the program name).
/// Returns the process exit code; diagnostics go to stderr.
pub fn run(args: &[String]) -> i32 {
    match commands::dispatch(args) {
        Ok(()) => ExitCode::Ok as i32,
        Err(e) => {
            eprintln!("lipsyn: {e}");
            e.exit_code() as i32
        }
    }
}
