//! `selfsim`: solve for self-similar equivariant wave-map profiles and
//! tabulate their energies, spectra and admissibility.
//!
//! Exit codes: 0 success, 2 usage error or inadmissible `(m, l)`,
//! 3 solver failure, 4 I/O error, 5 eigenvalue count mismatch.
//! `SELFSIM_THREADS` caps the number of worker threads.

mod args;
mod commands;
mod config;
mod error;
mod output;
mod pipeline;

use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

fn init_threads() -> CliResult<()> {
    let Ok(text) = std::env::var("SELFSIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SELFSIM_THREADS = `{text}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: &Cli) -> CliResult<String> {
    init_threads()?;
    let resolved = config::resolve(&cli.common)?;
    if cli.common.show_config {
        return commands::show_config(&cli.common, &resolved);
    }
    let Some(command) = &cli.command else {
        return Err(CliError::Usage(Cli::command().render_help().to_string()));
    };
    let args = &cli.common;
    match command {
        Command::Solve => commands::solve(args, &resolved),
        Command::Spectrum { n } => commands::spectrum(args, &resolved, *n),
        Command::Check => commands::check(args, &resolved),
        Command::Energy => commands::energy(args, &resolved),
        Command::Export => commands::export(args, &resolved),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("selfsim: {e}");
            if let CliError::CountMismatch(selfsim_core::Error::CountMismatch { eigenvalues, .. }) = &e {
                eprintln!("selfsim: eigenvalues found: {eigenvalues:?}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
