#![allow(clippy::needless_range_loop)]

mod commands;
mod error;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use jetvar::expr::ZeroTestConfig;
use jetvar::variational::FdConfig;
use jetvar::Format;

use crate::error::CliError;
use crate::problem::ProblemFile;

/// Symbolic calculus of variations on jets of submanifolds.
#[derive(Parser, Debug)]
#[command(name = "jetvar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    format: OutputFormat,

    /// Seed for the numeric zero test used on expressions with radicals.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Variation step of the finite-difference check.
    #[arg(long, default_value_t = 1e-4, global = true)]
    fd_step: f64,

    /// Relative tolerance of the finite-difference check.
    #[arg(long, default_value_t = 1e-4, global = true)]
    fd_tol: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Euler-Lagrange equations of the [lagrangian].
    El { file: PathBuf },
    /// Whether the [source] form is locally variational.
    Helmholtz { file: PathBuf },
    /// Whether the [lagrangian] has identically vanishing Euler-Lagrange expressions.
    NullCheck { file: PathBuf },
    /// Minimal submanifold equations for the [metric].
    Minimal { file: PathBuf },
    /// Relativistic particle in the [metric] with optional [potential]/[field].
    Relativistic { file: PathBuf },
    /// Finite-difference check of the first variation on a [graph].
    Verify { file: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Text,
    Latex,
    Machine,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Text => Format::Text,
            OutputFormat::Latex => Format::Latex,
            OutputFormat::Machine => Format::Machine,
        }
    }
}

fn load(path: &PathBuf) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ProblemFile::parse(&text)
}

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let fmt = Format::from(cli.format);
    if !(cli.fd_step > 0.0 && cli.fd_tol > 0.0) {
        return Err(CliError::Invalid("--fd-step and --fd-tol must be positive".into()));
    }
    match &cli.command {
        Command::El { file } => commands::euler_lagrange_cmd(&load(file)?, fmt),
        Command::Helmholtz { file } => commands::helmholtz_cmd(&load(file)?, fmt),
        Command::NullCheck { file } => commands::null_check_cmd(&load(file)?, fmt),
        Command::Minimal { file } => commands::minimal_cmd(&load(file)?, fmt),
        Command::Relativistic { file } => commands::relativistic_cmd(&load(file)?, fmt),
        Command::Verify { file } => {
            let config = FdConfig {
                step: cli.fd_step,
                tolerance: cli.fd_tol,
            };
            commands::verify_cmd(&load(file)?, fmt, config)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(seed) = cli.seed {
        ZeroTestConfig::set_default_seed(seed);
    }
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            match outcome.failure {
                None => ExitCode::SUCCESS,
                Some(msg) => {
                    eprintln!("jetvar: {msg}");
                    ExitCode::from(4)
                }
            }
        }
        Err(e) => {
            eprintln!("jetvar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
