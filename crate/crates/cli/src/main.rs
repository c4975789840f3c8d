mod cli;
mod commands;
mod config;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Split(a) => commands::split(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Solve(a) => commands::solve(a),
        Command::VerifyInverse(a) => commands::verify_inverse(a),
        Command::SweepScaling(a) => commands::sweep_scaling(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
