//! `stomads` — command-line front end for the StoMADS solver: single runs,
//! benchmark grids with data/performance profiles, and an adapter for
//! external blackbox evaluators.

mod args;
mod bench;
mod marker;
mod profiles_cmd;
mod run;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &args::Cli) -> Result<ExitCode> {
    match &cli.command {
        args::Command::Solve(a) => run::cmd_solve(a),
        args::Command::Bench(a) => bench::run(a),
        args::Command::Profiles(a) => profiles_cmd::run(a),
        args::Command::Blackbox(a) => run::cmd_blackbox(a),
    }
}
