//! Library side of the `qcut` binary: argument types, experiment config and
//! the subcommand implementations.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use anyhow::Result;

use args::{Cli, Command};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Plan(a) => commands::plan(a),
        Command::Train(a) => commands::train(a),
        Command::Profile(a) => commands::profile(a),
        Command::Verify(a) => commands::verify(a),
    }
}
