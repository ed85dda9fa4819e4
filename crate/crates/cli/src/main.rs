//! Command-line front end.
//!
//! Exit status: 0 all required checks passed, 1 a required check failed,
//! 2 usage or config error, 3 parameter outside its domain, 4 output path
//! not writable, 5 numerical failure.

mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use hubbard_lax::Error;

use args::{Cli, Command};
use config::FileConfig;
use output::{OutputError, Sink};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_OUTPUT: u8 = 4;
const EXIT_NUMERICAL: u8 = 5;

fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    if err.downcast_ref::<OutputError>().is_some() {
        return (EXIT_OUTPUT, "output error");
    }
    if err.downcast_ref::<toml::de::Error>().is_some() {
        return (EXIT_USAGE, "config error");
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidDriving(_)) => (EXIT_DOMAIN, "invalid driving"),
        Some(
            Error::InvalidArgument(_)
            | Error::InvalidCutoff(_)
            | Error::SiteOutOfRange { .. }
            | Error::TooLarge(_)
            | Error::CutoffMismatch(_),
        ) => (EXIT_DOMAIN, "invalid parameters"),
        Some(_) => (EXIT_NUMERICAL, "numerical failure"),
        None if err.downcast_ref::<std::io::Error>().is_some() => (EXIT_USAGE, "config error"),
        None => (EXIT_NUMERICAL, "error"),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let sink = Sink::new(cli.out.or_else(|| file.out.clone()))?;
    match &cli.command {
        Command::Verify(a) => commands::verify(a, &file, &sink),
        Command::Ness(a) => commands::ness(a, &file, &sink),
        Command::Oracle(a) => commands::oracle(a, &file, &sink),
        Command::Observe(a) => commands::observe(a, &file, &sink),
        Command::Commute(a) => commands::commute(a, &file, &sink),
        Command::Sweep(a) => commands::sweep(a, &file, &sink),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more required checks failed");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        Err(e) => {
            let (code, kind) = classify(&e);
            eprintln!("{kind}: {e:#}");
            ExitCode::from(code)
        }
    }
}
