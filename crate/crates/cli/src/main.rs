mod args;
mod commands;
mod config;
mod plot;
mod report;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::{Failure, EXIT_USAGE};

fn thread_cap() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("CATFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("CATFORGE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot size thread pool: {e}")))
}

fn run() -> Result<(), Failure> {
    let argv = config::merge(std::env::args_os().collect()).map_err(Failure::usage)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return if code == 0 {
                Ok(())
            } else {
                Err(Failure {
                    code,
                    message: String::new(),
                })
            };
        }
    };
    thread_cap()?;
    commands::run(cli.command)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code as u8)
        }
    }
}
