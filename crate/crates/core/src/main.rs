use std::process::ExitCode;

use clap::Parser;
use polar_moments::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(&cli, &mut stdout) {
        Ok(outcome) if outcome.violations.is_empty() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for v in &outcome.violations {
                eprintln!("violated: {v}");
            }
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
