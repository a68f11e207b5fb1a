use std::process::ExitCode;

use clap::Parser;
use sgi_cli::Cli;

fn main() -> ExitCode {
    sgi_cli::main_with(Cli::parse())
}
