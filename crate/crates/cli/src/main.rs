//! `hybridsent`: preprocess reviews, extract encoder features, train and
//! tune the classifiers, and report or plot the results.
//!
//! Exit status: 0 on success, 2 for usage or configuration errors, 3 for bad
//! input data, 4 for numeric failures.

mod cmd;
mod data;
mod opts;

use std::process::ExitCode;

use clap::Parser;
use hybridsent::Error;

use opts::{Cli, Command};

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(e) if e.is_numeric_error() => 4,
        Some(Error::Config(_) | Error::Parameter(_)) => 2,
        Some(_) => 3,
        None => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = cmd::exec(cli.sequential);
    let result = match cli.command {
        Command::Preprocess(a) => cmd::preprocess::run(a),
        Command::Features(a) => cmd::features::run(a, exec),
        Command::Train(a) => cmd::train::run(a, exec),
        Command::Hpo(a) => cmd::hpo::run(a, exec),
        Command::Eval(a) => cmd::eval::run(a, exec),
        Command::Tsne(a) => cmd::tsne::run(a, exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
