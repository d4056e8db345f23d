use std::process::ExitCode;

use clap::Parser;
use holosim_std::cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse(), &mut std::io::stdout().lock(), &mut std::io::stderr()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
