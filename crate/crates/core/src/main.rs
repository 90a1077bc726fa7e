use std::process::ExitCode;

use clap::Parser;
use toxsim::cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
