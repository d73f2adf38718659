//! Command-line front end: realization checks on matrix files, analytic
//! solution families, Schmidt entropies, curve data and Fock-space identity
//! checks.

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod matrix_file;

pub use commands::curves::CurveId;

/// Process exit status for a passing check.
pub const EXIT_PASS: i32 = 0;
/// Process exit status for a failing check.
pub const EXIT_FAIL: i32 = 1;
/// Process exit status for usage and input errors.
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] cfent_core::Error),
}

impl CliError {
    pub fn message(&self) -> String {
        self.to_string()
    }

    pub fn exit_code(&self) -> i32 {
        EXIT_INPUT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

/// Rendered command result.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

#[derive(Debug, Parser)]
#[command(name = "cfent", version, about = "Composite-fermion realization and entanglement toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the realization conditions for structural matrices in JSON files.
    Verify(commands::verify::VerifyArgs),
    /// Generate a solution pair from an analytic family.
    Solve(commands::solve::SolveArgs),
    /// Schmidt coefficients, entanglement entropy and purity of one matrix.
    Entropy(commands::entropy::EntropyArgs),
    /// Emit curve or surface data as CSV.
    Curves(commands::curves::CurvesArgs),
    /// Compare composite-operator brackets with their closed forms on a truncated Fock space.
    FockCheck(commands::fock_check::FockCheckArgs),
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Verify(a) => commands::verify::run(a),
        Command::Solve(a) => commands::solve::run(a),
        Command::Entropy(a) => commands::entropy::run(a),
        Command::Curves(a) => commands::curves::run(a),
        Command::FockCheck(a) => commands::fock_check::run(a),
    }
}

/// Parses `args` (program name first) and runs the command, mapping every
/// failure to an exit code and diagnostic.
pub fn run_from_args<I, T>(args: I) -> (Outcome, Option<String>)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let text = e.render().to_string();
            return if e.use_stderr() {
                (Outcome { code, stdout: String::new() }, Some(text))
            } else {
                (Outcome { code, stdout: text }, None)
            };
        }
    };
    match run(cli) {
        Ok(outcome) => (outcome, None),
        Err(e) => (
            Outcome {
                code: e.exit_code(),
                stdout: String::new(),
            },
            Some(format!("error: {e}\n")),
        ),
    }
}
