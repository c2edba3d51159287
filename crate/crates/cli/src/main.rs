//! `dfvqm`: scores, distorts and runs experiment grids from the shell.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for data errors.

mod args;
mod commands;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::Failure;

fn main() -> ExitCode {
    ExitCode::from(dispatch(std::env::args_os()))
}

fn dispatch<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = cap_threads() {
        eprintln!("error: {e}");
        return 1;
    }
    match commands::run(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn cap_threads() -> Result<(), String> {
    match dfvqm_core::harness::requested_threads().map_err(|e| e.to_string())? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("cannot size thread pool: {e}")),
        None => Ok(()),
    }
}
