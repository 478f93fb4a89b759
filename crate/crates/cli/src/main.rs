use std::process::ExitCode;

use clap::Parser;
use dustsynth_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dustsynth_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
