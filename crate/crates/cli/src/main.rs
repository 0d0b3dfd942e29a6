use std::process::ExitCode;

use asi_cli::cli::Cli;
use asi_cli::commands::{execute, EXIT_ERROR};
use clap::Parser;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match execute(&cli, &args, true) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
