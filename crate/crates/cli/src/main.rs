//! `pitchgrad` command-line front end.

mod args;
mod failure;
mod landscape_cmd;
mod list;
mod output;
mod trials;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Trials(a) => trials::run(a),
        Command::Curve(a) => landscape_cmd::curve(a),
        Command::Heatmap(a) => landscape_cmd::heatmap_cmd(a),
        Command::Field(a) => landscape_cmd::field(a),
        Command::List(a) => list::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
