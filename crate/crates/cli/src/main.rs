//! `qndsim`: detection probabilities, QND figures of merit, heralded pulse
//! shapes, and finite-kappa oracle checks for the two-sided atom-cavity
//! system. Exit codes: 0 success, 1 invalid configuration, 2 numerical
//! non-convergence.

mod commands;
mod config;
mod output;

use clap::error::ErrorKind;
use clap::Parser;

use commands::Failure;

fn main() {
    let cli = match config::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => {}
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
