//! `symortho` command-line front end.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage or input error.

mod args;
mod commands;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// A failed run with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn io(e: impl fmt::Display) -> Self {
        Self::usage(format!("i/o error: {e}"))
    }
}

impl From<symortho::Error> for Failure {
    fn from(e: symortho::Error) -> Self {
        match e {
            symortho::Error::NotCertified { .. } => Failure::verification(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SYMORTHO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("SYMORTHO_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 for --help.
    let cli = Cli::parse();
    match configure_threads().and_then(|_| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("symortho: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
