use std::process::ExitCode;

use clap::Parser;
use peridyn_cli::{run, Cli, ERROR_EXIT_CODE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ERROR_EXIT_CODE)
        }
    }
}
