use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use qecmetro::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut log = io::stderr();
    match execute(&cli, &mut out, &mut log) {
        Ok(()) => {
            let _ = out.flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            ExitCode::FAILURE
        }
    }
}
