//! Batch front end: config parsing, experiment runners and artifact writers.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;
use std::path::{Path, PathBuf};

/// Failure of a run, with the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or config: exit 2.
    Usage(String),
    /// A computation failed: exit 1.
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<limitlab::Error> for CliError {
    fn from(e: limitlab::Error) -> Self {
        use limitlab::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::DimensionMismatch { .. }
            | E::Construction(_)
            | E::InvalidPoint(_)
            | E::InvalidIsometry(_)
            | E::Json(_) => CliError::Usage(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

/// Experiments reachable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Group,
    Limitset,
    Delta,
    Psmeasure,
    Kms,
    KcycleCantor,
    KcycleCircle,
    KcycleSphere,
    Summability,
    Conjugacy,
}

pub const SUBCOMMANDS: &str =
    "group, limitset, delta, psmeasure, kms, kcycle {cantor|circle|sphere}, summability, conjugacy";

/// Runs one experiment and returns the files written.
pub fn run(exp: Experiment, config: &Path, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    use commands::*;
    match exp {
        Experiment::Group => group(config, out),
        Experiment::Limitset => limitset(config, out),
        Experiment::Delta => delta(config, out),
        Experiment::Psmeasure => psmeasure(config, out),
        Experiment::Kms => kms(config, out),
        Experiment::KcycleCantor => kcycle_cantor(config, out),
        Experiment::KcycleCircle => kcycle_circle(config, out),
        Experiment::KcycleSphere => kcycle_sphere(config, out),
        Experiment::Summability => summability(config, out),
        Experiment::Conjugacy => conjugacy(config, out),
    }
}
