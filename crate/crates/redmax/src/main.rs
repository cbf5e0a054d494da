use std::io::ErrorKind;
use std::process::ExitCode;

use clap::Parser;
use redmax::cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) if e.kind() == ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("redmax: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
