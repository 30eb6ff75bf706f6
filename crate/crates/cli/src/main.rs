mod args;
mod commands;
mod manifest;
mod verify;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use thiserror::Error;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or parameters outside the domain: exit 2.
    #[error("{0}")]
    Usage(String),
    /// A check ran and failed: exit 1.
    #[error("check failed: {0}")]
    CheckFailed(String),
    /// The computation itself could not finish: exit 1.
    #[error(transparent)]
    Core(#[from] haar_averager::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    }
    match cli.command {
        Command::Constant(a) => commands::constant(&a),
        Command::Optimize(a) => commands::optimize(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Transform(a) => commands::transform(&a),
        Command::KernelDump(a) => commands::kernel_dump(&a),
        Command::McCheck(a) => commands::mc_check(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            // Same exit status and help hint as a clap parse error.
            Cli::command()
                .error(clap::error::ErrorKind::ValueValidation, msg)
                .exit()
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
