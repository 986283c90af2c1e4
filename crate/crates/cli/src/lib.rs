//! File formats, reports and commands behind the `tl` binary.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod format;
pub mod report;

pub use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("invalid system: {0}")]
    Invalid(#[from] loctraj_core::ValidationError),
    #[error(transparent)]
    Core(#[from] loctraj_core::Error),
}

impl CliError {
    /// 2 for problems with the input, 1 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        use loctraj_core::Error as E;
        match self {
            CliError::Core(E::DegenerateCenter { .. }) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tl", version, about = "Local trajectories toolkit for finite dynamical systems")]
pub struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every structural invariant of a system file.
    Validate { file: PathBuf },
    /// Freeness and the localized norm conditions.
    Conditions {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = commands::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Decide whether the concrete map and the trajectory side are injective.
    Isom { file: PathBuf },
    /// Invertibility of an element through its orbit representations.
    Invert {
        file: PathBuf,
        #[arg(long)]
        element: PathBuf,
    },
    /// Norms of an element in every representation.
    Norms {
        file: PathBuf,
        #[arg(long)]
        element: PathBuf,
    },
    /// Verdicts for the family of orbit representations.
    Family {
        file: PathBuf,
        /// Keep only these orbits, e.g. `--orbits 0,2`.
        #[arg(long, value_delimiter = ',')]
        orbits: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Every witness the system admits.
    Witness {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Output of one invocation: the rendered report and the exit code.
pub struct Outcome {
    pub stdout: String,
    pub exit_code: u8,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let (report, ok) = match &cli.command {
        Command::Validate { file } => commands::validate_cmd(file)?,
        Command::Conditions { file, seed, samples } => (commands::conditions(file, *seed, *samples)?, true),
        Command::Isom { file } => (commands::isom(file)?, true),
        Command::Invert { file, element } => (commands::invert(file, element)?, true),
        Command::Norms { file, element } => (commands::norms(file, element)?, true),
        Command::Family { file, orbits, seed } => {
            (commands::family(file, orbits.as_deref(), *seed)?, true)
        }
        Command::Witness { file, seed } => (commands::witness(file, *seed)?, true),
    };
    let stdout = if cli.json {
        report.to_json()
    } else {
        report.to_text()
    };
    Ok(Outcome {
        stdout,
        exit_code: if ok { 0 } else { 2 },
    })
}
