use std::process::ExitCode;

use clap::Parser;
use qcut_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match qcut_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
